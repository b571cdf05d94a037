use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::SpecError;
use crate::features::{FeatureKind, ParamDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// One coefficient shared by all levels; multiple levels on a trial sum.
    Shared,
    /// One coefficient per level (`$`, and every plain intercept).
    PerLevel,
    /// Penalized per-level intercepts (`@`).
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    Student,
    Kc,
    Item,
    Column(String),
}

impl Component {
    pub fn from_ident(name: &str) -> Component {
        if name.eq_ignore_ascii_case("student") {
            Component::Student
        } else if name.eq_ignore_ascii_case("kc") {
            Component::Kc
        } else if name.eq_ignore_ascii_case("item") {
            Component::Item
        } else {
            Component::Column(name.into())
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Component::Student => "Student",
            Component::Kc => "KC",
            Component::Item => "Item",
            Component::Column(c) => c,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Column(c) if needs_quotes(c) => write!(f, "\"{c}\""),
            other => f.write_str(other.name()),
        }
    }
}

fn needs_quotes(name: &str) -> bool {
    let mut chars = name.chars();
    let plain_start = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    !plain_start
        || !name.chars().all(super::parse::is_ident_char)
        || matches!(
            Component::from_ident(name),
            Component::Student | Component::Kc | Component::Item
        )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Fixed(f64),
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub feature: FeatureKind,
    pub component: Component,
    pub scope: Scope,
    /// One binding per catalog parameter of `feature`, in catalog order.
    pub bindings: Vec<Binding>,
}

impl Term {
    pub fn param_defs(&self) -> &'static [ParamDef] {
        self.feature.params()
    }

    pub fn has_levels(&self) -> bool {
        self.scope != Scope::Shared
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let modifier = match (self.feature, self.scope) {
            (FeatureKind::Intercept, Scope::PerLevel) => "",
            (_, Scope::PerLevel) => "$",
            (_, Scope::Random) => "@",
            (_, Scope::Shared) => "",
        };
        write!(f, "{}{}({}", self.feature, modifier, self.component)?;
        for (def, b) in self.param_defs().iter().zip(&self.bindings) {
            match b {
                Binding::Free => write!(f, ", {}=?", def.name)?,
                Binding::Fixed(v) => write!(f, ", {}={}", def.name, v)?,
            }
        }
        f.write_str(")")
    }
}

/// Free parameter slot: term index, position in the term's catalog list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParam {
    pub term: usize,
    pub index: usize,
    pub def: ParamDef,
}

/// Parsed model. Equality is structural over the terms; the source text is
/// kept for reporting only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub terms: Vec<Term>,
    pub source: String,
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl ModelSpec {
    pub fn free_params(&self) -> Vec<FreeParam> {
        let mut out = Vec::new();
        for (t, term) in self.terms.iter().enumerate() {
            for (i, (def, b)) in term.param_defs().iter().zip(&term.bindings).enumerate() {
                if *b == Binding::Free {
                    out.push(FreeParam {
                        term: t,
                        index: i,
                        def: *def,
                    });
                }
            }
        }
        out
    }

    /// Concrete parameters per term with FREE slots filled from `free`, in
    /// [`ModelSpec::free_params`] order.
    pub fn resolve(&self, free: &[f64]) -> crate::Result<Vec<Vec<f64>>> {
        let slots = self.free_params();
        if slots.len() != free.len() {
            let missing = slots.get(free.len()).map(|s| (s.term, s.def.name));
            let (term, name) = missing.unwrap_or((0, "?"));
            return Err(crate::Error::UnboundParameter {
                term,
                name: name.into(),
            });
        }
        let mut it = free.iter();
        let mut out = Vec::with_capacity(self.terms.len());
        for (t, term) in self.terms.iter().enumerate() {
            let mut vals = Vec::with_capacity(term.bindings.len());
            for (def, b) in term.param_defs().iter().zip(&term.bindings) {
                let v = match b {
                    Binding::Fixed(v) => *v,
                    Binding::Free => *it.next().expect("length checked"),
                };
                if !def.contains(v) {
                    return Err(crate::Error::ParameterOutOfBounds {
                        term: t,
                        name: def.name.into(),
                        value: v,
                    });
                }
                vals.push(v);
            }
            out.push(vals);
        }
        Ok(out)
    }

    /// Copy of the spec with every FREE slot fixed to the next value of
    /// `free`, in [`ModelSpec::free_params`] order.
    pub fn bind(&self, free: &[f64]) -> crate::Result<ModelSpec> {
        let params = self.resolve(free)?;
        let mut out = self.clone();
        for (term, vals) in out.terms.iter_mut().zip(params) {
            term.bindings = vals.into_iter().map(Binding::Fixed).collect();
        }
        out.source = out.render();
        Ok(out)
    }

    /// Canonical text; parses back to an equal spec.
    pub fn render(&self) -> String {
        use alloc::string::ToString;
        self.to_string()
    }

    pub fn has_intercept(&self) -> bool {
        self.terms
            .iter()
            .any(|t| t.feature == FeatureKind::Intercept)
    }

    pub(crate) fn check_duplicates(&self) -> Result<(), SpecError> {
        for (i, a) in self.terms.iter().enumerate() {
            if let Some(b) = self.terms[..i].iter().find(|b| {
                b.feature == a.feature && b.component == a.component && b.scope == a.scope
            }) {
                return Err(SpecError::DuplicateTerm {
                    term: i,
                    feature: b.feature.name().into(),
                    component: b.component.name().into(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
