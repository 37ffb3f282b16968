use std::collections::HashMap;

use super::types::{ModelDefinition, Phase, Species};

/// One factor `[species]^exponent` of a mass-action monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factor {
    pub species: usize,
    pub exponent: u32,
}

/// Direction of the elementary flux a term derives from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// A signed rate term `coefficient * rate * prod(conc^exponent)` in one
/// species' superposed ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub rate: f64,
    pub monomial: Vec<Factor>,
    pub reaction: usize,
    pub direction: Direction,
    pub(crate) flux: usize,
}

/// An elementary directed flux `rate * prod(conc^exponent)`. Every term
/// references one flux, so each monomial is evaluated once per gradient.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Flux {
    pub rate: f64,
    pub monomial: Vec<Factor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledReaction {
    pub id: String,
    pub reactants: Vec<(usize, u32)>,
    pub products: Vec<(usize, u32)>,
    pub kf: f64,
    pub kb: f64,
}

/// Per-species superposed mass-action ODE system.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledNetwork {
    species: Vec<Species>,
    index: HashMap<String, usize>,
    reactions: Vec<CompiledReaction>,
    terms: Vec<Vec<Term>>,
    pub(crate) fluxes: Vec<Flux>,
    pub(crate) kernel: Kernel,
}

/// Flattened copy of the fluxes and terms for the integration loop.
#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct Kernel {
    pub flux_rate: Vec<f64>,
    /// Factors of flux `f` are `flux_start[f]..flux_start[f + 1]`.
    pub flux_start: Vec<u32>,
    pub factor_species: Vec<u32>,
    pub factor_exponent: Vec<u32>,
    /// Terms of species `i` are `term_start[i]..term_start[i + 1]`.
    pub term_start: Vec<u32>,
    pub term_coefficient: Vec<f64>,
    pub term_flux: Vec<u32>,
}

impl Kernel {
    fn build(fluxes: &[Flux], terms: &[Vec<Term>]) -> Self {
        let mut k = Kernel::default();
        k.flux_start.push(0);
        for f in fluxes {
            k.flux_rate.push(f.rate);
            for factor in &f.monomial {
                k.factor_species.push(factor.species as u32);
                k.factor_exponent.push(factor.exponent);
            }
            k.flux_start.push(k.factor_species.len() as u32);
        }
        k.term_start.push(0);
        for list in terms {
            for t in list {
                k.term_coefficient.push(t.coefficient);
                k.term_flux.push(t.flux as u32);
            }
            k.term_start.push(k.term_coefficient.len() as u32);
        }
        k
    }
}

impl CompiledNetwork {
    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn species_names(&self) -> impl Iterator<Item = &str> {
        self.species.iter().map(|s| s.name.as_str())
    }

    pub fn reactions(&self) -> &[CompiledReaction] {
        &self.reactions
    }

    /// Terms of the superposed ODE for species `i`; `terms(i).len()` is q.
    pub fn terms(&self, i: usize) -> &[Term] {
        &self.terms[i]
    }

    pub fn term_count(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    pub fn solid_species(&self) -> impl Iterator<Item = usize> + '_ {
        self.species
            .iter()
            .enumerate()
            .filter(|(_, s)| s.phase == Phase::Solid)
            .map(|(i, _)| i)
    }
}

/// Build the superposed ODE system.
///
/// Terms for each species follow reaction declaration order, forward before
/// backward. Backward terms exist only when `kb > 0`. The stoichiometric
/// multiplier is applied in both directions unless the reaction carries
/// `paper_compat`, in which case backward terms use a unit multiplier.
pub fn compile_network(model: &ModelDefinition) -> CompiledNetwork {
    let index: HashMap<String, usize> = model
        .species
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.clone(), i))
        .collect();
    let resolve = |ps: &[super::types::Participant]| -> Vec<(usize, u32)> {
        ps.iter().map(|p| (index[&p.species], p.stoichiometry)).collect()
    };

    let mut terms: Vec<Vec<Term>> = vec![Vec::new(); model.species.len()];
    let mut fluxes = Vec::new();
    let mut reactions = Vec::with_capacity(model.reactions.len());

    for (ri, r) in model.reactions.iter().enumerate() {
        let reactants = resolve(&r.reactants);
        let products = resolve(&r.products);
        let kf = r.kf();
        let kb = r.kb();

        let mut directions = vec![(Direction::Forward, kf, &reactants)];
        if kb > 0.0 {
            directions.push((Direction::Backward, kb, &products));
        }
        for (direction, rate, source) in directions {
            let monomial: Vec<Factor> = source
                .iter()
                .map(|&(species, exponent)| Factor { species, exponent })
                .collect();
            let flux = fluxes.len();
            fluxes.push(Flux { rate, monomial: monomial.clone() });
            let (consumed, produced) = match direction {
                Direction::Forward => (&reactants, &products),
                Direction::Backward => (&products, &reactants),
            };
            let unit = direction == Direction::Backward && r.paper_compat;
            for (side, sign) in [(consumed, -1.0), (produced, 1.0)] {
                for &(s, n) in side.iter() {
                    let magnitude = if unit { 1.0 } else { n as f64 };
                    terms[s].push(Term {
                        coefficient: sign * magnitude,
                        rate,
                        monomial: monomial.clone(),
                        reaction: ri,
                        direction,
                        flux,
                    });
                }
            }
        }

        reactions.push(CompiledReaction {
            id: r.id.clone(),
            reactants,
            products,
            kf,
            kb,
        });
    }

    // Within one species keep forward terms of a reaction ahead of its
    // backward terms even when the species sits on both sides.
    for list in &mut terms {
        list.sort_by_key(|t| (t.reaction, t.direction == Direction::Backward));
    }

    let kernel = Kernel::build(&fluxes, &terms);
    CompiledNetwork {
        species: model.species.clone(),
        index,
        reactions,
        terms,
        fluxes,
        kernel,
    }
}
