//! Deterministic random networks for tests and benchmarks.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::network::FlowNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// A random source-to-sink backbone plus uniform random arcs.
    RandomSparse,
    /// A square lattice with the source feeding the left column and the right
    /// column feeding the sink.
    Grid,
    /// A few hubs carrying most arcs, so degrees are far from uniform.
    StarHeavy,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::RandomSparse, Family::Grid, Family::StarHeavy];

    pub fn name(self) -> &'static str {
        match self {
            Family::RandomSparse => "random-sparse",
            Family::Grid => "grid",
            Family::StarHeavy => "star-heavy",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| GenError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("unknown family {0:?} (expected random-sparse, grid or star-heavy)")]
    UnknownFamily(String),
    #[error("{family} needs at least {min} vertices, got {n}")]
    TooFewVertices { family: Family, n: usize, min: usize },
    #[error("{family} with {n} vertices allows {min}..={max} arcs, asked for {m}")]
    ArcCount {
        family: Family,
        n: usize,
        m: usize,
        min: usize,
        max: usize,
    },
    #[error("maximum capacity must be at least 1, got {0}")]
    Capacity(i64),
}

/// Parameters of one generated instance. For [`Family::Grid`], `n` is the
/// lattice size (rounded down to a square) and the source and sink come on
/// top; `m` of `None` picks the family default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub m: Option<usize>,
    pub max_capacity: i64,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Vertex count, arc range, and default arc count of the instance.
    fn shape(&self) -> Result<(usize, usize, usize, usize), GenError> {
        let family = self.family;
        match family {
            Family::RandomSparse | Family::StarHeavy => {
                let min_n = if family == Family::StarHeavy { 4 } else { 2 };
                if self.n < min_n {
                    return Err(GenError::TooFewVertices {
                        family,
                        n: self.n,
                        min: min_n,
                    });
                }
                let hubs = hub_count(self.n);
                let min = if family == Family::StarHeavy {
                    2 * hubs + (self.n - 2 - hubs)
                } else {
                    self.n - 1
                };
                let max = 3 * self.n;
                Ok((self.n, min, max, (2 * self.n).max(min)))
            }
            Family::Grid => {
                let side = (self.n as f64).sqrt() as usize;
                let side = (side..=side + 1).rev().find(|k| k * k <= self.n).unwrap_or(0);
                if side < 1 {
                    return Err(GenError::TooFewVertices {
                        family,
                        n: self.n,
                        min: 1,
                    });
                }
                let base = 2 * side * (side - 1) + 2 * side;
                let max = base + 2 * side * (side - 1);
                Ok((side * side + 2, base, max, base))
            }
        }
    }

    pub fn generate(&self) -> Result<FlowNetwork, GenError> {
        if self.max_capacity < 1 {
            return Err(GenError::Capacity(self.max_capacity));
        }
        let (n, min, max, default) = self.shape()?;
        let m = self.m.unwrap_or(default);
        if m < min || m > max {
            return Err(GenError::ArcCount {
                family: self.family,
                n: self.n,
                m,
                min,
                max,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let arcs = match self.family {
            Family::RandomSparse => random_sparse(&mut rng, n, m),
            Family::Grid => grid(&mut rng, n, m),
            Family::StarHeavy => star_heavy(&mut rng, n, m),
        };
        let arcs: Vec<(usize, usize, i64)> = arcs
            .into_iter()
            .map(|(u, v)| (u, v, rng.gen_range(1..=self.max_capacity)))
            .collect();
        Ok(FlowNetwork::from_arcs(n, 0, n - 1, &arcs).expect("generated arcs are in range"))
    }
}

fn hub_count(n: usize) -> usize {
    (n / 20).max(1)
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    loop {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            return (u, v);
        }
    }
}

fn random_sparse(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut inner: Vec<usize> = (1..n - 1).collect();
    inner.shuffle(rng);
    let mut order = vec![0];
    order.extend(inner);
    order.push(n - 1);
    let mut arcs: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
    while arcs.len() < m {
        arcs.push(random_pair(rng, n));
    }
    arcs.shuffle(rng);
    arcs
}

fn grid(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let side = ((n - 2) as f64).sqrt().round() as usize;
    let cell = |r: usize, c: usize| 1 + r * side + c;
    let (s, t) = (0, n - 1);
    let mut arcs = Vec::new();
    let mut back = Vec::new();
    for r in 0..side {
        arcs.push((s, cell(r, 0)));
        for c in 0..side {
            if c + 1 < side {
                arcs.push((cell(r, c), cell(r, c + 1)));
                back.push((cell(r, c + 1), cell(r, c)));
            }
            if r + 1 < side {
                arcs.push((cell(r, c), cell(r + 1, c)));
                back.push((cell(r + 1, c), cell(r, c)));
            }
        }
        arcs.push((cell(r, side - 1), t));
    }
    back.shuffle(rng);
    let extra = m - arcs.len();
    arcs.extend(back.into_iter().take(extra));
    arcs
}

fn star_heavy(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let hubs = hub_count(n);
    let (s, t) = (0, n - 1);
    let hub_ids: Vec<usize> = (1..=hubs).collect();
    let mut arcs = Vec::new();
    for &h in &hub_ids {
        arcs.push((s, h));
        arcs.push((h, t));
    }
    for v in hubs + 1..n - 1 {
        let h = *hub_ids.choose(rng).unwrap();
        arcs.push(if rng.gen_bool(0.5) { (h, v) } else { (v, h) });
    }
    while arcs.len() < m {
        let h = *hub_ids.choose(rng).unwrap();
        let v = rng.gen_range(0..n);
        if v == h {
            continue;
        }
        arcs.push(if rng.gen_bool(0.5) { (h, v) } else { (v, h) });
    }
    arcs.shuffle(rng);
    arcs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: Family, n: usize, m: Option<usize>, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            family,
            n,
            m,
            max_capacity: 100,
            seed,
        }
    }

    #[test]
    fn sparse_has_requested_arcs_and_is_deterministic() {
        let a = spec(Family::RandomSparse, 10, Some(20), 1).generate().unwrap();
        let b = spec(Family::RandomSparse, 10, Some(20), 1).generate().unwrap();
        assert_eq!(a.m(), 20);
        assert_eq!(a, b);
        let c = spec(Family::RandomSparse, 10, Some(20), 2).generate().unwrap();
        assert_ne!(a.arcs(), c.arcs());
    }

    #[test]
    fn grid_four_by_four() {
        let g = spec(Family::Grid, 16, None, 3).generate().unwrap();
        assert_eq!(g.n(), 18);
        assert_eq!(g.m(), 2 * 4 * 3 + 8);
        let wider = spec(Family::Grid, 16, Some(40), 3).generate().unwrap();
        assert_eq!(wider.m(), 40);
    }

    #[test]
    fn sparse_rejects_dense_request() {
        assert!(matches!(
            spec(Family::RandomSparse, 10, Some(31), 1).generate(),
            Err(GenError::ArcCount { .. })
        ));
    }

    #[test]
    fn star_heavy_has_a_high_degree_hub() {
        let g = spec(Family::StarHeavy, 100, Some(250), 9).generate().unwrap();
        assert_eq!(g.m(), 250);
        let bound = g.degree_bound();
        assert!(g.max_in_degree() > bound || g.max_out_degree() > bound);
    }

    #[test]
    fn capacities_in_range() {
        for f in Family::ALL {
            let g = spec(f, 50, None, 4).generate().unwrap();
            assert!(g.arcs().iter().all(|a| (1..=100).contains(&a.capacity)));
            assert!(g.m() <= 3 * g.n());
        }
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("mesh".parse::<Family>().is_err());
    }
}
