//! Line-oriented reader for model files.
//!
//! ```text
//! # comment
//! species KNO3 charge=0 phase=solid formula=K1N1O3 molar_mass=101.1032
//! reaction r2: KNO3 -> K+ + NO3- kf=976.8870716 kb=0
//! reaction r5: H3PO4 <-> H+ + H2PO4- K=0.00725 c=100
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};

use super::error::ModelError;
use super::types::{Formula, ModelDefinition, Participant, Phase, RateSpec, Reaction, Species};

/// Upper bound of the correction coefficient `c` in the derived rate form.
pub const MAX_CORRECTION: f64 = 1000.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub column: usize,
}

/// Split a line into whitespace-delimited tokens, dropping any `#` comment.
pub(crate) fn tokenize(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in content.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &content[s..i],
                    column: content[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &content[s..],
            column: content[..s].chars().count() + 1,
        });
    }
    tokens
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.contains([':', '=', '#'])
        && !name.chars().all(|c| c.is_ascii_digit())
        && name != "+"
        && name != "->"
        && name != "<->"
}

/// Parse an elemental formula such as `Ca1N2O6` or `KNO3`; a missing count
/// means one atom. Repeated elements accumulate.
pub fn parse_formula(text: &str) -> Result<Formula, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut counts = BTreeMap::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_ascii_uppercase() {
            return Err(format!("expected element symbol at `{}`", &text[i..]));
        }
        let mut element = String::new();
        element.push(chars[i]);
        i += 1;
        while i < chars.len() && chars[i].is_ascii_lowercase() {
            element.push(chars[i]);
            i += 1;
        }
        let digits_start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let count = if digits_start == i {
            1
        } else {
            let digits: String = chars[digits_start..i].iter().collect();
            digits
                .parse::<u32>()
                .map_err(|_| format!("bad atom count `{digits}`"))?
        };
        if count == 0 {
            return Err(format!("element {element} has count 0"));
        }
        *counts.entry(element).or_insert(0) += count;
    }
    if counts.is_empty() {
        return Err("formula is empty".into());
    }
    Ok(Formula(counts))
}

struct PendingReaction {
    line: usize,
    reaction: Reaction,
}

/// Parse and validate a complete model file.
pub fn parse_model(text: &str) -> Result<ModelDefinition, ModelError> {
    let mut species: Vec<Species> = Vec::new();
    let mut species_lines: HashMap<String, usize> = HashMap::new();
    let mut pending: Vec<PendingReaction> = Vec::new();
    let mut reaction_ids: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens = tokenize(raw);
        let Some(head) = tokens.first() else {
            continue;
        };
        match head.text {
            "species" => {
                let s = parse_species(line, &tokens)?;
                if species_lines.contains_key(&s.name) {
                    return Err(ModelError::DuplicateSpecies { line, name: s.name });
                }
                species_lines.insert(s.name.clone(), line);
                species.push(s);
            }
            "reaction" => {
                let r = parse_reaction(line, &tokens)?;
                if !reaction_ids.insert(r.id.clone()) {
                    return Err(ModelError::DuplicateReaction { line, id: r.id });
                }
                pending.push(PendingReaction { line, reaction: r });
            }
            other => {
                return Err(syntax(
                    line,
                    head.column,
                    format!("expected `species` or `reaction`, found `{other}`"),
                ))
            }
        }
    }

    let by_name: HashMap<&str, &Species> = species.iter().map(|s| (s.name.as_str(), s)).collect();
    for p in &pending {
        validate_reaction(p.line, &p.reaction, &by_name)?;
    }

    Ok(ModelDefinition {
        species,
        reactions: pending.into_iter().map(|p| p.reaction).collect(),
    })
}

fn split_attr<'a>(line: usize, tok: &Token<'a>) -> Result<(&'a str, &'a str), ModelError> {
    tok.text
        .split_once('=')
        .ok_or_else(|| syntax(line, tok.column, format!("expected key=value, found `{}`", tok.text)))
}

fn parse_species(line: usize, tokens: &[Token<'_>]) -> Result<Species, ModelError> {
    let name_tok = tokens
        .get(1)
        .ok_or_else(|| syntax(line, tokens[0].column + 7, "missing species name"))?;
    let name = name_tok.text;
    if !is_valid_name(name) {
        return Err(syntax(line, name_tok.column, format!("invalid species name `{name}`")));
    }
    let invalid = |message: String| ModelError::InvalidSpecies {
        line,
        name: name.to_string(),
        message,
    };

    let mut charge = None;
    let mut phase = None;
    let mut formula = None;
    let mut molar_mass = None;
    for tok in &tokens[2..] {
        let (key, value) = split_attr(line, tok)?;
        let dup = || syntax(line, tok.column, format!("`{key}` given twice"));
        match key {
            "charge" => {
                if charge.is_some() {
                    return Err(dup());
                }
                let v = value
                    .parse::<i32>()
                    .map_err(|_| syntax(line, tok.column, format!("bad charge `{value}`")))?;
                charge = Some(v);
            }
            "phase" => {
                if phase.is_some() {
                    return Err(dup());
                }
                let p = value.parse::<Phase>().map_err(|_| {
                    syntax(
                        line,
                        tok.column,
                        format!("phase must be aqueous, solid or liquid, found `{value}`"),
                    )
                })?;
                phase = Some(p);
            }
            "formula" => {
                if formula.is_some() {
                    return Err(dup());
                }
                formula = Some(parse_formula(value).map_err(invalid)?);
            }
            "molar_mass" => {
                if molar_mass.is_some() {
                    return Err(dup());
                }
                let m = value
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("malformed molar mass `{value}`")))?;
                if !(m.is_finite() && m > 0.0) {
                    return Err(invalid(format!("molar mass must be positive, found {value}")));
                }
                molar_mass = Some(m);
            }
            _ => return Err(syntax(line, tok.column, format!("unknown species attribute `{key}`"))),
        }
    }

    let end_col = tokens.last().map(|t| t.column + t.text.chars().count()).unwrap_or(1);
    Ok(Species {
        name: name.to_string(),
        charge: charge.ok_or_else(|| syntax(line, end_col, "missing `charge=`"))?,
        phase: phase.unwrap_or(Phase::Aqueous),
        formula: formula.ok_or_else(|| syntax(line, end_col, "missing `formula=`"))?,
        molar_mass,
    })
}

fn parse_side(line: usize, tokens: &[Token<'_>], fallback_col: usize) -> Result<Vec<Participant>, ModelError> {
    if tokens.is_empty() {
        return Err(syntax(line, fallback_col, "reaction side is empty"));
    }
    let mut out: Vec<Participant> = Vec::new();
    let mut i = 0;
    loop {
        let tok = tokens
            .get(i)
            .ok_or_else(|| syntax(line, fallback_col, "expected species after `+`"))?;
        let mut stoichiometry = 1;
        let mut name_tok = tok;
        if tok.text.chars().all(|c| c.is_ascii_digit()) {
            stoichiometry = tok
                .text
                .parse::<u32>()
                .map_err(|_| syntax(line, tok.column, format!("bad stoichiometry `{}`", tok.text)))?;
            if stoichiometry == 0 {
                return Err(syntax(line, tok.column, "stoichiometry must be at least 1"));
            }
            i += 1;
            name_tok = tokens.get(i).ok_or_else(|| {
                syntax(line, tok.column + tok.text.len(), "expected species name after stoichiometry")
            })?;
        }
        if !is_valid_name(name_tok.text) {
            return Err(syntax(
                line,
                name_tok.column,
                format!("invalid species name `{}`", name_tok.text),
            ));
        }
        match out.iter_mut().find(|p| p.species == name_tok.text) {
            Some(p) => p.stoichiometry += stoichiometry,
            None => out.push(Participant {
                species: name_tok.text.to_string(),
                stoichiometry,
            }),
        }
        i += 1;
        match tokens.get(i) {
            None => break,
            Some(t) if t.text == "+" => i += 1,
            Some(t) => return Err(syntax(line, t.column, format!("expected `+`, found `{}`", t.text))),
        }
    }
    Ok(out)
}

fn parse_rate_value(line: usize, id: &str, key: &str, value: &str) -> Result<f64, ModelError> {
    let v = value.parse::<f64>().map_err(|_| ModelError::InvalidRate {
        line,
        reaction: id.to_string(),
        message: format!("malformed value `{key}={value}`"),
    })?;
    if !v.is_finite() {
        return Err(ModelError::InvalidRate {
            line,
            reaction: id.to_string(),
            message: format!("non-finite value `{key}={value}`"),
        });
    }
    Ok(v)
}

fn parse_reaction(line: usize, tokens: &[Token<'_>]) -> Result<Reaction, ModelError> {
    let id_tok = tokens
        .get(1)
        .ok_or_else(|| syntax(line, tokens[0].column + 8, "missing reaction id"))?;
    let (id, mut rest) = if let Some(id) = id_tok.text.strip_suffix(':') {
        (id, 2)
    } else if tokens.get(2).map(|t| t.text) == Some(":") {
        (id_tok.text, 3)
    } else {
        return Err(syntax(line, id_tok.column, "expected `<id>:` after `reaction`"));
    };
    if id.is_empty() || id.contains(['=', ':']) {
        return Err(syntax(line, id_tok.column, format!("invalid reaction id `{id}`")));
    }

    let arrow_pos = tokens[rest..]
        .iter()
        .position(|t| t.text == "->" || t.text == "<->")
        .map(|p| p + rest)
        .ok_or_else(|| syntax(line, id_tok.column, "missing `->` or `<->`"))?;
    let reversible = tokens[arrow_pos].text == "<->";
    let reactants = parse_side(line, &tokens[rest..arrow_pos], tokens[arrow_pos].column)?;
    rest = arrow_pos + 1;
    let attr_start = tokens[rest..]
        .iter()
        .position(|t| t.text.contains('=') || t.text == "paper_compat")
        .map(|p| p + rest)
        .unwrap_or(tokens.len());
    let end_col = tokens.last().map(|t| t.column + t.text.chars().count()).unwrap_or(1);
    let products = parse_side(line, &tokens[rest..attr_start], end_col)?;

    let mut values: BTreeMap<&str, f64> = BTreeMap::new();
    let mut paper_compat = false;
    for tok in &tokens[attr_start..] {
        if tok.text == "paper_compat" {
            paper_compat = true;
            continue;
        }
        let (key, value) = split_attr(line, tok)?;
        if !matches!(key, "kf" | "kb" | "K" | "c" | "Kref") {
            return Err(syntax(line, tok.column, format!("unknown reaction attribute `{key}`")));
        }
        if values.contains_key(key) {
            return Err(syntax(line, tok.column, format!("`{key}` given twice")));
        }
        values.insert(key, parse_rate_value(line, id, key, value)?);
    }

    let bad_rate = |message: &str| ModelError::InvalidRate {
        line,
        reaction: id.to_string(),
        message: message.to_string(),
    };
    let explicit = values.contains_key("kf") || values.contains_key("kb");
    let derived = values.contains_key("K") || values.contains_key("c");
    let rate = match (explicit, derived) {
        (true, false) => {
            let (Some(&kf), Some(&kb)) = (values.get("kf"), values.get("kb")) else {
                return Err(bad_rate("explicit rates need both kf= and kb="));
            };
            if kf < 0.0 || kb < 0.0 {
                return Err(bad_rate("kf and kb must be non-negative"));
            }
            RateSpec::Explicit { kf, kb }
        }
        (false, true) => {
            let (Some(&k), Some(&c)) = (values.get("K"), values.get("c")) else {
                return Err(bad_rate("derived rates need both K= and c="));
            };
            if k <= 0.0 {
                return Err(bad_rate("equilibrium constant K must be positive"));
            }
            if !(c > 0.0 && c <= MAX_CORRECTION) {
                return Err(bad_rate("correction coefficient c must lie in (0, 1000]"));
            }
            RateSpec::Derived { k, c }
        }
        (true, true) => return Err(bad_rate("mixes kf/kb with K/c")),
        (false, false) => return Err(bad_rate("missing rate (kf= kb= or K= c=)")),
    };
    let reference_k = values.get("Kref").copied();
    if let Some(k) = reference_k {
        if k <= 0.0 {
            return Err(bad_rate("Kref must be positive"));
        }
    }

    if reversible && rate.kb() == 0.0 {
        return Err(ModelError::ArrowMismatch {
            line,
            reaction: id.to_string(),
            message: "`<->` requires a positive backward coefficient".into(),
        });
    }
    if !reversible && rate.kb() != 0.0 {
        return Err(ModelError::ArrowMismatch {
            line,
            reaction: id.to_string(),
            message: "`->` is irreversible and requires kb=0".into(),
        });
    }

    Ok(Reaction {
        id: id.to_string(),
        reactants,
        products,
        reversible,
        rate,
        reference_k,
        paper_compat,
    })
}

fn validate_reaction(
    line: usize,
    r: &Reaction,
    species: &HashMap<&str, &Species>,
) -> Result<(), ModelError> {
    let lookup = |p: &Participant| {
        species
            .get(p.species.as_str())
            .copied()
            .ok_or_else(|| ModelError::UndeclaredSpecies {
                line,
                reaction: r.id.clone(),
                species: p.species.clone(),
            })
    };
    let mut left: BTreeMap<&str, u64> = BTreeMap::new();
    let mut right: BTreeMap<&str, u64> = BTreeMap::new();
    let mut charge_left = 0i64;
    let mut charge_right = 0i64;
    for p in &r.reactants {
        let s = lookup(p)?;
        for (e, n) in s.formula.elements() {
            *left.entry(e).or_default() += n as u64 * p.stoichiometry as u64;
        }
        charge_left += s.charge as i64 * p.stoichiometry as i64;
    }
    for p in &r.products {
        let s = lookup(p)?;
        for (e, n) in s.formula.elements() {
            *right.entry(e).or_default() += n as u64 * p.stoichiometry as u64;
        }
        charge_right += s.charge as i64 * p.stoichiometry as i64;
    }
    let elements: std::collections::BTreeSet<&str> = left.keys().chain(right.keys()).copied().collect();
    for e in elements {
        let l = left.get(e).copied().unwrap_or(0);
        let rr = right.get(e).copied().unwrap_or(0);
        if l != rr {
            return Err(ModelError::ElementUnbalanced {
                line,
                reaction: r.id.clone(),
                element: e.to_string(),
                left: l,
                right: rr,
            });
        }
    }
    if charge_left != charge_right {
        return Err(ModelError::ChargeUnbalanced {
            line,
            reaction: r.id.clone(),
            left: charge_left,
            right: charge_right,
        });
    }
    Ok(())
}
