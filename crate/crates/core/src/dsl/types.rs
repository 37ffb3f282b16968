use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Physical phase of a species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Aqueous,
    Solid,
    Liquid,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Aqueous => "aqueous",
            Phase::Solid => "solid",
            Phase::Liquid => "liquid",
        }
    }
}

impl FromStr for Phase {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aqueous" => Ok(Phase::Aqueous),
            "solid" => Ok(Phase::Solid),
            "liquid" => Ok(Phase::Liquid),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Elemental composition, element symbol to atom count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Formula(pub BTreeMap<String, u32>);

impl Formula {
    pub fn count(&self, element: &str) -> u32 {
        self.0.get(element).copied().unwrap_or(0)
    }

    pub fn elements(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(e, n)| (e.as_str(), *n))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (element, count) in &self.0 {
            write!(f, "{element}{count}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    pub charge: i32,
    pub phase: Phase,
    pub formula: Formula,
    /// g/mol; only needed for total dissolved solids.
    pub molar_mass: Option<f64>,
}

/// How a reaction's rate coefficients are specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSpec {
    Explicit { kf: f64, kb: f64 },
    /// Equilibrium constant plus correction coefficient: `kf = K * c`, `kb = c`.
    Derived { k: f64, c: f64 },
}

impl RateSpec {
    pub fn kf(&self) -> f64 {
        match *self {
            RateSpec::Explicit { kf, .. } => kf,
            RateSpec::Derived { k, c } => k * c,
        }
    }

    pub fn kb(&self) -> f64 {
        match *self {
            RateSpec::Explicit { kb, .. } => kb,
            RateSpec::Derived { c, .. } => c,
        }
    }

    pub fn is_reversible(&self) -> bool {
        self.kb() > 0.0
    }
}

/// A species name with its stoichiometric count on one side of a reaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participant {
    pub species: String,
    pub stoichiometry: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub id: String,
    pub reactants: Vec<Participant>,
    pub products: Vec<Participant>,
    /// `<->` in the model file; `->` marks an irreversible reaction.
    pub reversible: bool,
    pub rate: RateSpec,
    /// Reference equilibrium constant declared next to explicit rates, used
    /// only for consistency reporting.
    pub reference_k: Option<f64>,
    /// Drop the stoichiometric multiplier on backward terms.
    pub paper_compat: bool,
}

impl Reaction {
    pub fn kf(&self) -> f64 {
        self.rate.kf()
    }

    pub fn kb(&self) -> f64 {
        self.rate.kb()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelDefinition {
    pub species: Vec<Species>,
    pub reactions: Vec<Reaction>,
}

impl ModelDefinition {
    pub fn species(&self, name: &str) -> Option<&Species> {
        self.species.iter().find(|s| s.name == name)
    }

    pub fn reaction(&self, id: &str) -> Option<&Reaction> {
        self.reactions.iter().find(|r| r.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty() && self.reactions.is_empty()
    }

    /// Serialize back into the model-file grammar.
    ///
    /// Floats use the shortest round-trip representation, so
    /// `parse_model(&m.to_model_text())` reproduces `m` exactly.
    pub fn to_model_text(&self) -> String {
        let mut out = String::new();
        for s in &self.species {
            out.push_str(&format!(
                "species {} charge={} phase={} formula={}",
                s.name,
                signed(s.charge),
                s.phase,
                s.formula
            ));
            if let Some(m) = s.molar_mass {
                out.push_str(&format!(" molar_mass={m:?}"));
            }
            out.push('\n');
        }
        for r in &self.reactions {
            let side = |ps: &[Participant]| {
                ps.iter()
                    .map(|p| format!("{} {}", p.stoichiometry, p.species))
                    .collect::<Vec<_>>()
                    .join(" + ")
            };
            let arrow = if r.reversible { "<->" } else { "->" };
            out.push_str(&format!(
                "reaction {}: {} {} {}",
                r.id,
                side(&r.reactants),
                arrow,
                side(&r.products)
            ));
            match r.rate {
                RateSpec::Explicit { kf, kb } => out.push_str(&format!(" kf={kf:?} kb={kb:?}")),
                RateSpec::Derived { k, c } => out.push_str(&format!(" K={k:?} c={c:?}")),
            }
            if let Some(k) = r.reference_k {
                out.push_str(&format!(" Kref={k:?}"));
            }
            if r.paper_compat {
                out.push_str(" paper_compat");
            }
            out.push('\n');
        }
        out
    }
}

fn signed(charge: i32) -> String {
    if charge > 0 {
        format!("+{charge}")
    } else {
        charge.to_string()
    }
}
