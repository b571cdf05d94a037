use super::kind::FeatureKind;
use super::state::{ComponentState, DecayedCounts, Moment};
use crate::math::{log, log1p, pow};

/// Value of feature `kind` for a trial at `now`, given the level's strictly
/// prior state. `params` are the kind's nonlinear parameters in catalog order.
///
/// Intercepts evaluate to 1. Raw covariates are not history features and
/// evaluate to 0 here; the design builder reads them from the event.
pub fn evaluate(kind: FeatureKind, state: &ComponentState, params: &[f64], now: Moment) -> f64 {
    use FeatureKind::*;
    debug_assert_eq!(params.len(), kind.params().len());
    match kind {
        Intercept => 1.0,
        Numeric => 0.0,
        Lineafm | Logafm | Powafm | Expdecafm => count_feature(kind, state, params),
        Recency | Base | Base2 | Base4 | Ppe | Basesuc | Basefail | Base2suc | Base2fail => {
            memory_feature(kind, state, params, now)
        }
        Logsuc | Logfail | Linesuc | Linefail | Expdecsuc | Expdecfail | Linecomp => {
            performance_feature(kind, state, params)
        }
        Prop | Propdec | Propdec2 | Logit | Logitdec => proportion_feature(kind, state, params),
    }
}

/// Decayed counts at rate `d`, reusing the streamed accumulators when the
/// state already runs at that rate.
fn decayed(state: &ComponentState, d: f64) -> DecayedCounts {
    let cached = state.decayed();
    if cached.rate.to_bits() == d.to_bits() {
        *cached
    } else {
        DecayedCounts::replay(d, state.history())
    }
}

fn count_feature(kind: FeatureKind, state: &ComponentState, params: &[f64]) -> f64 {
    let n = state.n_opp();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    match kind {
        FeatureKind::Lineafm => n,
        FeatureKind::Logafm => log1p(n),
        FeatureKind::Powafm => pow(n, params[0]),
        FeatureKind::Expdecafm => decayed(state, params[0]).all,
        _ => unreachable!(),
    }
}

/// Seconds since the first opportunity, floored at 1.
fn age(state: &ComponentState, now: Moment) -> f64 {
    (now.time - state.t_first().unwrap_or(now.time)).max(1.0)
}

/// Age with between-session time scaled by `b`, floored at 1.
fn session_scaled_age(state: &ComponentState, now: Moment, b: f64) -> f64 {
    let a = age(state, now);
    let within = state.intrasession_at(now).min(a);
    (within + b * (a - within)).max(1.0)
}

fn memory_feature(kind: FeatureKind, state: &ComponentState, params: &[f64], now: Moment) -> f64 {
    use FeatureKind::*;
    let n = state.n_opp();
    if n == 0 {
        return 0.0;
    }
    let d = params[0];
    match kind {
        Recency => {
            let since = (now.time - state.t_last().unwrap_or(now.time)).max(1.0);
            pow(since, -d)
        }
        Base => log1p(n as f64) * pow(age(state, now), -d),
        Basesuc => log1p(state.n_suc() as f64) * pow(age(state, now), -d),
        Basefail => log1p(state.n_fail() as f64) * pow(age(state, now), -d),
        Base2 => log1p(n as f64) * pow(session_scaled_age(state, now, params[1]), -d),
        Base2suc => {
            log1p(state.n_suc() as f64) * pow(session_scaled_age(state, now, params[1]), -d)
        }
        Base2fail => {
            log1p(state.n_fail() as f64) * pow(session_scaled_age(state, now, params[1]), -d)
        }
        Base4 => {
            let (b, xi, gamma) = (params[1], params[2], params[3]);
            let spacing = if n >= 2 {
                let span = state.t_last().unwrap_or(0.0) - state.t_first().unwrap_or(0.0);
                pow((span / (n - 1) as f64).max(1.0), xi)
            } else {
                1.0
            };
            pow(log1p(n as f64), gamma) * spacing * pow(session_scaled_age(state, now, b), -d)
        }
        Ppe => ppe(state, params, now),
        _ => unreachable!(),
    }
}

/// Practice raised to `c`, times the recency-weighted age raised to a decay
/// that shrinks with wider spacing.
fn ppe(state: &ComponentState, params: &[f64], now: Moment) -> f64 {
    let (c, x, b, m) = (params[0], params[1], params[2], params[3]);
    let history = state.history();
    let n = history.len();
    let mut weight_sum = 0.0;
    let mut weighted_age = 0.0;
    for o in history {
        let t = (now.time - o.time).max(1.0);
        let w = pow(t, -x);
        weight_sum += w;
        weighted_age += w * t;
    }
    let t_w = weighted_age / weight_sum;
    let decay = if n <= 1 {
        b
    } else {
        b + m * state.lag_stabilizer() / (n - 1) as f64
    };
    pow(n as f64, c) * pow(t_w, -decay)
}

fn performance_feature(kind: FeatureKind, state: &ComponentState, params: &[f64]) -> f64 {
    use FeatureKind::*;
    let s = state.n_suc() as f64;
    let f = state.n_fail() as f64;
    match kind {
        Logsuc => log1p(s),
        Logfail => log1p(f),
        Linesuc => s,
        Linefail => f,
        Linecomp => s - f,
        Expdecsuc if state.n_opp() > 0 => decayed(state, params[0]).suc,
        Expdecfail if state.n_opp() > 0 => decayed(state, params[0]).fail,
        Expdecsuc | Expdecfail => 0.0,
        _ => unreachable!(),
    }
}

fn proportion_feature(kind: FeatureKind, state: &ComponentState, params: &[f64]) -> f64 {
    use FeatureKind::*;
    let s = state.n_suc() as f64;
    let f = state.n_fail() as f64;
    match kind {
        Prop => {
            if state.n_opp() == 0 {
                0.5
            } else {
                s / (s + f)
            }
        }
        Logit => {
            let c = params[0];
            log((s + c) / (f + c))
        }
        Propdec | Propdec2 | Logitdec => {
            let (gs, gf) = kind
                .ghosts()
                .expect("decayed proportion kinds carry ghosts");
            let dc = decayed(state, params[0]);
            let sd = gs * dc.ghost + dc.suc;
            let fd = gf * dc.ghost + dc.fail;
            if kind == Logitdec {
                log(sd / fd)
            } else {
                sd / (sd + fd)
            }
        }
        _ => unreachable!(),
    }
}
