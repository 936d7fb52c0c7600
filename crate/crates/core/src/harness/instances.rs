//! Random test instances: connected subdomains of small boxes carrying
//! sampled potentials.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{make_box, Domain, LatticePoint};
use crate::potential::{sample_potential, DistributionSpec, PotentialField};

pub fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Largest box radius `m` with `(2m + 1)^d <= max_sites`.
fn radius_for(max_sites: usize, d: usize) -> usize {
    let mut m = 0;
    while (2 * (m + 1) + 1usize).pow(d as u32) <= max_sites {
        m += 1;
    }
    m
}

/// Site percolation on `Λ_m` followed by the largest connected component
/// (first in site order on ties). Falls back to the single origin site.
pub fn random_connected_subdomain<R: Rng>(rng: &mut R, d: usize, max_sites: usize) -> Domain {
    let m = rng.random_range(0..=radius_for(max_sites, d));
    let full = make_box(m, d).expect("d >= 1");
    let keep_prob = rng.random_range(0.55..=1.0);
    let kept: Vec<bool> = (0..full.len()).map(|_| rng.random::<f64>() < keep_prob).collect();

    let mut label = vec![usize::MAX; full.len()];
    let mut best: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..full.len() {
        if !kept[start] || label[start] != usize::MAX {
            continue;
        }
        let mut comp = vec![start];
        label[start] = start;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for &j in full.neighbor_indices(i) {
                if kept[j] && label[j] == usize::MAX {
                    label[j] = start;
                    comp.push(j);
                    queue.push_back(j);
                }
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    if best.is_empty() {
        return Domain::new(d, vec![LatticePoint::origin(d).expect("d >= 1")])
            .expect("single site");
    }
    let points = best.iter().map(|&i| full.point(i).clone()).collect();
    Domain::new(d, points).expect("component of a valid domain")
}

/// Bernoulli with a random parameter, or Uniform01.
pub fn random_spec<R: Rng>(rng: &mut R) -> DistributionSpec {
    if rng.random::<bool>() {
        DistributionSpec::Bernoulli {
            p: rng.random_range(0.05..0.95),
        }
    } else {
        DistributionSpec::Uniform01
    }
}

/// A connected subdomain in dimension 1 or 2 with a sampled potential.
pub fn random_instance<R: Rng>(rng: &mut R, max_sites: usize) -> PotentialField {
    let d = rng.random_range(1..=2);
    let dom = Arc::new(random_connected_subdomain(rng, d, max_sites));
    let spec = random_spec(rng);
    sample_potential(spec, &dom, rng.random(), 0)
}
