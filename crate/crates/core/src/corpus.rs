//! Seeded random test functions for the inequality calibrations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::periodized_bracket_power;
use crate::error::Result;
use crate::field::ComplexField;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorpusKind {
    /// `p(x) e^{-((x-x0)/w)²}` with a random cubic `p`.
    GaussianPolynomial,
    /// `a e^{-((x-x0)/w)²} e^{iκx}`.
    ModulatedGaussian,
    /// `a ⟨(x-x0)/w⟩^{-p}`, periodized, `p ∈ {6, 7, 8}`.
    Rational,
}

const KINDS: [CorpusKind; 3] = [
    CorpusKind::GaussianPolynomial,
    CorpusKind::ModulatedGaussian,
    CorpusKind::Rational,
];

#[derive(Debug, Clone)]
pub struct CorpusMember {
    pub kind: CorpusKind,
    pub field: ComplexField,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub members: Vec<CorpusMember>,
}

impl Corpus {
    /// `count` functions cycling through all kinds.
    pub fn generate(grid: &Grid, seed: u64, count: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..count)
            .map(|i| member(grid, KINDS[i % KINDS.len()], &mut rng))
            .collect::<Result<_>>()?;
        Ok(Self { members })
    }

    /// `count` functions of a single kind.
    pub fn generate_kind(grid: &Grid, seed: u64, count: usize, kind: CorpusKind) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..count).map(|_| member(grid, kind, &mut rng)).collect::<Result<_>>()?;
        Ok(Self { members })
    }
}

fn member(grid: &Grid, kind: CorpusKind, rng: &mut ChaCha8Rng) -> Result<CorpusMember> {
    let x0 = rng.gen_range(-3.0..3.0);
    let field = match kind {
        CorpusKind::GaussianPolynomial => {
            let w: f64 = rng.gen_range(0.7..2.5);
            let coef: [Complex64; 4] =
                std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            ComplexField::from_fn(grid, |x| {
                let y = (x - x0) / w;
                let p = coef.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * y + c);
                p * (-y * y).exp()
            })?
        }
        CorpusKind::ModulatedGaussian => {
            let w: f64 = rng.gen_range(0.7..2.5);
            let a: f64 = rng.gen_range(0.2..2.0);
            let kappa: f64 = rng.gen_range(-3.0..3.0);
            ComplexField::from_fn(grid, |x| {
                let y = (x - x0) / w;
                Complex64::from_polar(a * (-y * y).exp(), kappa * x)
            })?
        }
        CorpusKind::Rational => {
            let w: f64 = rng.gen_range(0.8..2.0);
            let a: f64 = rng.gen_range(0.2..2.0);
            let p = rng.gen_range(6..=8) as f64;
            let period = grid.length() / w;
            ComplexField::from_real_fn(grid, |x| a * periodized_bracket_power((x - x0) / w, period, p))?
        }
    };
    Ok(CorpusMember { kind, field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{edge_ratio, DEFAULT_EDGE_TOL};
    use std::f64::consts::PI;

    #[test]
    fn seeded_corpus_is_reproducible() {
        let g = Grid::new(80.0 * PI, 1024).unwrap();
        let a = Corpus::generate(&g, 7, 9).unwrap();
        let b = Corpus::generate(&g, 7, 9).unwrap();
        let c = Corpus::generate(&g, 8, 9).unwrap();
        assert!(a.members.iter().zip(&b.members).all(|(x, y)| x.field == y.field));
        assert!(a.members.iter().zip(&c.members).any(|(x, y)| x.field != y.field));
        assert_eq!(a.members[2].kind, CorpusKind::Rational);
    }

    #[test]
    fn members_decay_at_the_edges() {
        let g = Grid::new(80.0 * PI, 1024).unwrap();
        for m in Corpus::generate(&g, 1, 30).unwrap().members {
            let r = edge_ratio(&m.field);
            assert!(r <= DEFAULT_EDGE_TOL, "{:?}: {r}", m.kind);
        }
    }
}
