//! Closed-form feature values computed directly from a raw history, written
//! independently of the streaming accumulators.

use lkt_core::features::evaluate;
use lkt_core::features::{ComponentState, FeatureKind, Moment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One prior opportunity: time, session ordinal, outcome.
#[derive(Debug, Clone, Copy)]
pub struct Ev {
    pub time: f64,
    pub session: u32,
    pub y: u8,
}

fn weighted_sum(h: &[Ev], d: f64, mass: impl Fn(&Ev) -> f64) -> f64 {
    let n = h.len();
    h.iter()
        .enumerate()
        .map(|(i, e)| d.powi((n - 1 - i) as i32) * mass(e))
        .sum()
}

fn within_session(h: &[Ev], now: (f64, u32)) -> f64 {
    let mut total = 0.0;
    for w in h.windows(2) {
        if w[1].session == w[0].session {
            total += w[1].time - w[0].time;
        }
    }
    let last = h.last().unwrap();
    if last.session == now.1 {
        total += (now.0 - last.time).max(0.0);
    }
    total
}

fn scaled_age(h: &[Ev], now: (f64, u32), b: f64) -> f64 {
    let a = (now.0 - h[0].time).max(1.0);
    let i = within_session(h, now).min(a);
    (i + b * (a - i)).max(1.0)
}

/// Value of `kind` at `now` from the prior history `h`.
pub fn feature(kind: FeatureKind, h: &[Ev], p: &[f64], now: (f64, u32)) -> f64 {
    use FeatureKind::*;
    let n = h.len() as f64;
    let s = h.iter().filter(|e| e.y == 1).count() as f64;
    let f = n - s;
    let ln = f64::ln;
    let decayed_prop = |gs: f64, gf: f64| {
        let d = p[0];
        let sd = gs * d.powi(h.len() as i32) + weighted_sum(h, d, |e| e.y as f64);
        let fd = gf * d.powi(h.len() as i32) + weighted_sum(h, d, |e| 1.0 - e.y as f64);
        (sd, fd)
    };
    match kind {
        Intercept => return 1.0,
        Numeric => return 0.0,
        Prop => return if h.is_empty() { 0.5 } else { s / n },
        Propdec => {
            let (a, b) = decayed_prop(1.0, 1.0);
            return a / (a + b);
        }
        Propdec2 => {
            let (a, b) = decayed_prop(0.0, 3.0);
            return a / (a + b);
        }
        Logitdec => {
            let (a, b) = decayed_prop(1.0, 1.0);
            return ln(a / b);
        }
        Logit => return ln((s + p[0]) / (f + p[0])),
        Linesuc => return s,
        Linefail => return f,
        Linecomp => return s - f,
        Logsuc => return ln(1.0 + s),
        Logfail => return ln(1.0 + f),
        Lineafm => return n,
        Logafm => return ln(1.0 + n),
        _ => {}
    }
    if h.is_empty() {
        return 0.0;
    }
    let age = (now.0 - h[0].time).max(1.0);
    match kind {
        Powafm => n.powf(p[0]),
        Expdecafm => weighted_sum(h, p[0], |_| 1.0),
        Expdecsuc => weighted_sum(h, p[0], |e| e.y as f64),
        Expdecfail => weighted_sum(h, p[0], |e| 1.0 - e.y as f64),
        Recency => (now.0 - h.last().unwrap().time).max(1.0).powf(-p[0]),
        Base => ln(1.0 + n) * age.powf(-p[0]),
        Basesuc => ln(1.0 + s) * age.powf(-p[0]),
        Basefail => ln(1.0 + f) * age.powf(-p[0]),
        Base2 => ln(1.0 + n) * scaled_age(h, now, p[1]).powf(-p[0]),
        Base2suc => ln(1.0 + s) * scaled_age(h, now, p[1]).powf(-p[0]),
        Base2fail => ln(1.0 + f) * scaled_age(h, now, p[1]).powf(-p[0]),
        Base4 => {
            let (d, b, xi, gamma) = (p[0], p[1], p[2], p[3]);
            let spacing = if h.len() >= 2 {
                let gaps: f64 = h.windows(2).map(|w| w[1].time - w[0].time).sum();
                (gaps / (n - 1.0)).max(1.0).powf(xi)
            } else {
                1.0
            };
            ln(1.0 + n).powf(gamma) * spacing * scaled_age(h, now, b).powf(-d)
        }
        Ppe => {
            let (c, x, b, m) = (p[0], p[1], p[2], p[3]);
            let ages: Vec<f64> = h.iter().map(|e| (now.0 - e.time).max(1.0)).collect();
            let norm: f64 = ages.iter().map(|t| t.powf(-x)).sum();
            let t_w: f64 = ages.iter().map(|t| t.powf(-x) / norm * t).sum();
            let d_t = if h.len() <= 1 {
                b
            } else {
                let stab: f64 = h
                    .windows(2)
                    .map(|w| 1.0 / ln(std::f64::consts::E + (w[1].time - w[0].time)))
                    .sum();
                b + m * stab / (n - 1.0)
            };
            n.powf(c) * t_w.powf(-d_t)
        }
        _ => unreachable!("handled above"),
    }
}

/// Every history feature in the catalog.
pub fn history_kinds() -> Vec<FeatureKind> {
    FeatureKind::ALL
        .iter()
        .copied()
        .filter(|k| k.is_history())
        .collect()
}

/// Uniform draw inside each parameter's box.
pub fn random_params(kind: FeatureKind, rng: &mut ChaCha8Rng) -> Vec<f64> {
    kind.params()
        .iter()
        .map(|def| loop {
            let v = rng.random_range(def.lower..=def.upper);
            if def.contains(v) {
                break v;
            }
        })
        .collect()
}

/// Random history with multi-scale gaps, occasional ties and session breaks.
pub fn random_history(rng: &mut ChaCha8Rng, len: usize) -> Vec<Ev> {
    let mut t = rng.random_range(0.0..1e5);
    let mut session = 0;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        if i > 0 {
            let gap = if rng.random_bool(0.1) {
                0.0
            } else {
                10f64.powf(rng.random_range(-1.0..6.0))
            };
            t += gap;
            if gap > 1800.0 || rng.random_bool(0.05) {
                session += 1;
            }
        }
        out.push(Ev {
            time: t,
            session,
            y: rng.random_bool(0.6) as u8,
        });
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn moment(e: &Ev) -> Moment {
    Moment {
        time: e.time,
        session: e.session,
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Checks streaming vs fresh replay (bit-exact) and vs the closed form
/// (1e-12 relative) at every prefix of `h`; returns the first mismatch.
pub fn check_history(kind: FeatureKind, params: &[f64], h: &[Ev]) -> Result<usize, String> {
    let rate = kind.decay_param().map_or(1.0, |i| params[i]);
    let mut streaming = ComponentState::new(rate);
    let mut checked = 0;
    for k in 0..h.len() {
        let now = moment(&h[k]);
        let live = evaluate(kind, &streaming, params, now);
        let mut fresh = ComponentState::new(rate);
        for e in &h[..k] {
            fresh.update(moment(e), e.y).map_err(|e| e.to_string())?;
        }
        let replayed = evaluate(kind, &fresh, params, now);
        if live.to_bits() != replayed.to_bits() {
            return Err(format!(
                "{}: streaming {live} != replay {replayed} at prefix {k}",
                kind.name()
            ));
        }
        let oracle = feature(kind, &h[..k], params, (now.time, now.session));
        if !close(live, oracle) {
            return Err(format!(
                "{}{params:?}: streaming {live} != closed form {oracle} at prefix {k}",
                kind.name()
            ));
        }
        streaming.update(now, h[k].y).map_err(|e| e.to_string())?;
        checked += 1;
    }
    Ok(checked)
}

/// Randomized prefix check over `histories` histories of length ≤ `max_len`
/// for every history kind; returns the number of prefix values compared.
pub fn prefix_suite(histories: usize, max_len: usize, seed: u64) -> Result<usize, String> {
    let mut rng = rng(seed);
    let kinds = history_kinds();
    let mut total = 0;
    for _ in 0..histories {
        let len = rng.random_range(1..=max_len);
        let h = random_history(&mut rng, len);
        for &kind in &kinds {
            let params = random_params(kind, &mut rng);
            total += check_history(kind, &params, &h)?;
        }
    }
    Ok(total)
}

/// Exhaustive check of the decayed-count recurrences against explicit
/// weighted sums with ghost seeds over all outcome sequences up to `max_len`.
pub fn exhaustive_recurrences(max_len: usize) -> Result<usize, String> {
    use lkt_core::features::DecayedCounts;
    let mut checked = 0;
    for len in 0..=max_len {
        for bits in 0u32..(1 << len) {
            let ys: Vec<u8> = (0..len).map(|i| ((bits >> i) & 1) as u8).collect();
            for d in [0.05, 0.5, 0.8, 0.97, 1.0] {
                let mut c = DecayedCounts::new(d);
                for &y in &ys {
                    c.push(y);
                }
                let n = len as i32;
                let suc: f64 = ys
                    .iter()
                    .enumerate()
                    .map(|(i, &y)| d.powi(n - 1 - i as i32) * y as f64)
                    .sum();
                let fail: f64 = ys
                    .iter()
                    .enumerate()
                    .map(|(i, &y)| d.powi(n - 1 - i as i32) * (1 - y) as f64)
                    .sum();
                for (gs, gf) in [(1.0, 1.0), (0.0, 3.0)] {
                    let (sd, fd) = (gs * c.ghost + c.suc, gf * c.ghost + c.fail);
                    let (os, of) = (gs * d.powi(n) + suc, gf * d.powi(n) + fail);
                    if !(close(sd, os) && close(fd, of)) {
                        return Err(format!(
                            "d={d} ys={ys:?} ghosts=({gs},{gf}): ({sd},{fd}) vs ({os},{of})"
                        ));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
