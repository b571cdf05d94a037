use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::ast::{Binding, Component, ModelSpec, Scope, Term};
use super::SpecError;
use crate::features::FeatureKind;

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.pos += want.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: char) -> Result<(), SpecError> {
        if self.eat(want) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{want}'")))
        }
    }

    fn error(&self, message: String) -> SpecError {
        let found = match self.peek_raw() {
            Some(c) => format!("{message}, found '{c}'"),
            None => format!("{message}, found end of input"),
        };
        SpecError::Syntax {
            pos: self.pos,
            message: found,
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let first = rest.chars().next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let len = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
        self.pos += len;
        Some(&self.src[start..start + len])
    }

    fn quoted(&mut self) -> Result<Option<&'a str>, SpecError> {
        if !self.eat('"') {
            return Ok(None);
        }
        let start = self.pos;
        match self.src[start..].find('"') {
            Some(len) if len > 0 => {
                self.pos += len + 1;
                Ok(Some(&self.src[start..start + len]))
            }
            Some(_) => Err(SpecError::Syntax {
                pos: start,
                message: "empty quoted column name".into(),
            }),
            None => Err(SpecError::Syntax {
                pos: start - 1,
                message: "unterminated quoted column name".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<f64, SpecError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .char_indices()
            .take_while(|&(i, c)| {
                c.is_ascii_digit()
                    || c == '.'
                    || c == 'e'
                    || c == 'E'
                    || ((c == '+' || c == '-')
                        && (i == 0 || matches!(rest.as_bytes()[i - 1], b'e' | b'E')))
            })
            .count();
        let text = &rest[..len];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += len;
                Ok(v)
            }
            _ => Err(self.error("expected a number or '?'".into())),
        }
    }
}

fn catalog() -> String {
    let names: Vec<&str> = FeatureKind::ALL.iter().map(|k| k.name()).collect();
    names.join(", ")
}

/// Parses a model specification. Every malformed input yields a diagnostic;
/// no partial spec is ever returned.
pub fn parse_model(text: &str) -> Result<ModelSpec, SpecError> {
    if text.trim().is_empty() {
        return Err(SpecError::Empty);
    }
    let mut cur = Cursor { src: text, pos: 0 };
    let mut terms = Vec::new();
    loop {
        terms.push(parse_term(&mut cur, terms.len())?);
        if cur.eat('+') {
            continue;
        }
        if cur.peek().is_some() {
            return Err(cur.error("expected '+' or end of model".into()));
        }
        break;
    }
    let spec = ModelSpec {
        terms,
        source: text.to_string(),
    };
    spec.check_duplicates()?;
    Ok(spec)
}

fn parse_term(cur: &mut Cursor<'_>, index: usize) -> Result<Term, SpecError> {
    let name_pos = {
        cur.skip_ws();
        cur.pos
    };
    let name = cur
        .ident()
        .ok_or_else(|| cur.error("expected a feature name".into()))?;
    let feature = FeatureKind::from_name(name).ok_or_else(|| SpecError::UnknownFeature {
        pos: name_pos,
        name: name.to_string(),
        catalog: catalog(),
    })?;

    let mod_pos = cur.pos;
    let scope = if cur.eat('$') {
        if feature == FeatureKind::Numeric {
            return Err(SpecError::NumericScope { pos: mod_pos });
        }
        Scope::PerLevel
    } else if cur.eat('@') {
        if feature != FeatureKind::Intercept {
            return Err(SpecError::RandomScope {
                pos: mod_pos,
                feature: feature.name().into(),
            });
        }
        Scope::Random
    } else if feature == FeatureKind::Intercept {
        Scope::PerLevel
    } else {
        Scope::Shared
    };

    cur.expect('(')?;
    let component = match cur.quoted()? {
        Some(q) => Component::Column(q.to_string()),
        None => Component::from_ident(
            cur.ident()
                .ok_or_else(|| cur.error("expected a component name".into()))?,
        ),
    };

    let defs = feature.params();
    let mut slots: Vec<Option<Binding>> = vec![None; defs.len()];
    let mut extra = Vec::new();
    while cur.eat(',') {
        let pname = cur
            .ident()
            .ok_or_else(|| cur.error("expected a parameter name".into()))?;
        cur.expect('=')?;
        let binding = if cur.eat('?') {
            Binding::Free
        } else {
            Binding::Fixed(cur.number()?)
        };
        match defs.iter().position(|d| d.name == pname) {
            Some(i) if slots[i].is_some() => {
                return Err(SpecError::DuplicateParam {
                    term: index,
                    feature: feature.name().into(),
                    name: pname.into(),
                })
            }
            Some(i) => {
                if let Binding::Fixed(v) = binding {
                    if !defs[i].contains(v) {
                        return Err(SpecError::OutOfBounds {
                            term: index,
                            feature: feature.name().into(),
                            name: pname.into(),
                            value: v,
                        });
                    }
                }
                slots[i] = Some(binding);
            }
            None => extra.push(pname.to_string()),
        }
    }
    cur.expect(')')?;

    let missing: Vec<String> = defs
        .iter()
        .zip(&slots)
        .filter(|(_, s)| s.is_none())
        .map(|(d, _)| d.name.to_string())
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(SpecError::Arity {
            term: index,
            feature: feature.name().into(),
            missing,
            extra,
        });
    }
    let bindings = slots
        .into_iter()
        .map(|s| s.expect("checked above"))
        .collect();
    Ok(Term {
        feature,
        component,
        scope,
        bindings,
    })
}
