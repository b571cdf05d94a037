use core::fmt;

use serde::{Deserialize, Serialize};

/// Declared range of a nonlinear feature parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDef {
    pub name: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl ParamDef {
    const fn closed(name: &'static str, lower: f64, upper: f64) -> Self {
        ParamDef {
            name,
            lower,
            upper,
            lower_open: false,
            upper_open: false,
        }
    }

    const fn open_below(name: &'static str, lower: f64, upper: f64) -> Self {
        ParamDef {
            name,
            lower,
            upper,
            lower_open: true,
            upper_open: false,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let lo = if self.lower_open {
            v > self.lower
        } else {
            v >= self.lower
        };
        let hi = if self.upper_open {
            v < self.upper
        } else {
            v <= self.upper
        };
        v.is_finite() && lo && hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Default starting value of the outer search: 0.5 when strictly inside
    /// the box, otherwise the midpoint.
    pub fn start(&self) -> f64 {
        if self.lower < 0.5 && 0.5 < self.upper {
            0.5
        } else {
            self.midpoint()
        }
    }

    /// Inverse of [`ParamDef::from_unbounded`] on the open interval.
    pub fn to_unbounded(&self, v: f64) -> f64 {
        let q = ((v - self.lower) / (self.upper - self.lower)).clamp(1e-12, 1.0 - 1e-12);
        libm::log(q / (1.0 - q))
    }

    /// Smooth map from the real line onto the open interval (lower, upper);
    /// zero maps to the midpoint.
    pub fn from_unbounded(&self, u: f64) -> f64 {
        let v = self.lower + (self.upper - self.lower) * crate::math::sigmoid(u);
        // keep strict inequality at open ends after rounding
        if self.lower_open && v <= self.lower {
            libm::nextafter(self.lower, self.upper)
        } else {
            v
        }
    }
}

const D_EXP: ParamDef = ParamDef::open_below("d", 0.0, 1.0);
const D_POW: ParamDef = ParamDef::closed("d", 0.0, 3.0);
const D_COUNT: ParamDef = ParamDef::closed("d", 0.0, 1.0);
const B_SESSION: ParamDef = ParamDef::closed("b", 0.0, 1.0);
const XI: ParamDef = ParamDef::closed("xi", 0.0, 1.0);
const GAMMA: ParamDef = ParamDef::open_below("gamma", 0.0, 3.0);
const PPE_C: ParamDef = ParamDef::open_below("c", 0.0, 1.0);
const PPE_X: ParamDef = ParamDef::closed("x", 0.0, 1.0);
const PPE_B: ParamDef = ParamDef::closed("b", 0.0, 3.0);
const PPE_M: ParamDef = ParamDef::closed("m", 0.0, 3.0);
const SEED_C: ParamDef = ParamDef::open_below("c", 0.0, 4.0);

/// Feature catalog. Every kind except `Intercept` and `Numeric` is a
/// function of a component level's strictly prior history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Intercept,
    /// Raw numeric covariate column.
    Numeric,
    Lineafm,
    Logafm,
    Powafm,
    Recency,
    Expdecafm,
    Base,
    Base2,
    Base4,
    Ppe,
    Logsuc,
    Linesuc,
    Logfail,
    Linefail,
    Expdecsuc,
    Expdecfail,
    Basesuc,
    Basefail,
    Base2suc,
    Base2fail,
    Linecomp,
    Prop,
    Propdec,
    Propdec2,
    Logit,
    Logitdec,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 27] = [
        FeatureKind::Intercept,
        FeatureKind::Numeric,
        FeatureKind::Lineafm,
        FeatureKind::Logafm,
        FeatureKind::Powafm,
        FeatureKind::Recency,
        FeatureKind::Expdecafm,
        FeatureKind::Base,
        FeatureKind::Base2,
        FeatureKind::Base4,
        FeatureKind::Ppe,
        FeatureKind::Logsuc,
        FeatureKind::Linesuc,
        FeatureKind::Logfail,
        FeatureKind::Linefail,
        FeatureKind::Expdecsuc,
        FeatureKind::Expdecfail,
        FeatureKind::Basesuc,
        FeatureKind::Basefail,
        FeatureKind::Base2suc,
        FeatureKind::Base2fail,
        FeatureKind::Linecomp,
        FeatureKind::Prop,
        FeatureKind::Propdec,
        FeatureKind::Propdec2,
        FeatureKind::Logit,
        FeatureKind::Logitdec,
    ];

    pub fn name(self) -> &'static str {
        use FeatureKind::*;
        match self {
            Intercept => "intercept",
            Numeric => "numeric",
            Lineafm => "lineafm",
            Logafm => "logafm",
            Powafm => "powafm",
            Recency => "recency",
            Expdecafm => "expdecafm",
            Base => "base",
            Base2 => "base2",
            Base4 => "base4",
            Ppe => "ppe",
            Logsuc => "logsuc",
            Linesuc => "linesuc",
            Logfail => "logfail",
            Linefail => "linefail",
            Expdecsuc => "expdecsuc",
            Expdecfail => "expdecfail",
            Basesuc => "basesuc",
            Basefail => "basefail",
            Base2suc => "base2suc",
            Base2fail => "base2fail",
            Linecomp => "linecomp",
            Prop => "prop",
            Propdec => "propdec",
            Propdec2 => "propdec2",
            Logit => "logit",
            Logitdec => "logitdec",
        }
    }

    pub fn from_name(name: &str) -> Option<FeatureKind> {
        // older spelling of the exponential count feature
        if name == "expdecfm" {
            return Some(FeatureKind::Expdecafm);
        }
        FeatureKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Nonlinear parameters in canonical order.
    pub fn params(self) -> &'static [ParamDef] {
        use FeatureKind::*;
        match self {
            Intercept | Numeric | Lineafm | Logafm | Logsuc | Linesuc | Logfail | Linefail
            | Linecomp | Prop => &[],
            Powafm => &[D_COUNT],
            Recency | Base | Basesuc | Basefail => &[D_POW],
            Expdecafm | Expdecsuc | Expdecfail | Propdec | Propdec2 | Logitdec => &[D_EXP],
            Base2 | Base2suc | Base2fail => &[D_POW, B_SESSION],
            Base4 => &[D_POW, B_SESSION, XI, GAMMA],
            Ppe => &[PPE_C, PPE_X, PPE_B, PPE_M],
            Logit => &[SEED_C],
        }
    }

    /// Index of the exponential decay rate driving the state's decayed counts.
    pub fn decay_param(self) -> Option<usize> {
        use FeatureKind::*;
        match self {
            Expdecafm | Expdecsuc | Expdecfail | Propdec | Propdec2 | Logitdec => Some(0),
            _ => None,
        }
    }

    /// Depends on prior outcomes.
    pub fn is_adaptive(self) -> bool {
        use FeatureKind::*;
        matches!(
            self,
            Logsuc
                | Linesuc
                | Logfail
                | Linefail
                | Expdecsuc
                | Expdecfail
                | Basesuc
                | Basefail
                | Base2suc
                | Base2fail
                | Linecomp
                | Prop
                | Propdec
                | Propdec2
                | Logit
                | Logitdec
        )
    }

    /// Changes with the amount or timing of prior practice.
    pub fn is_dynamic(self) -> bool {
        !matches!(self, FeatureKind::Intercept | FeatureKind::Numeric)
    }

    /// Computed from a component level's history (everything but intercepts
    /// and raw covariates).
    pub fn is_history(self) -> bool {
        self.is_dynamic()
    }

    /// Ghost (success, failure) seeds of the decayed proportion kinds.
    pub fn ghosts(self) -> Option<(f64, f64)> {
        match self {
            FeatureKind::Propdec | FeatureKind::Logitdec => Some((1.0, 1.0)),
            FeatureKind::Propdec2 => Some((0.0, 3.0)),
            _ => None,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
