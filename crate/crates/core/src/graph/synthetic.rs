//! Seeded random instances for tests and benchmarks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Link, LinkGraph};

/// Strongly connected graph: an obligatory Hamiltonian cycle plus `extra`
/// random obligatory arcs, and `facultative` random arcs leaving a set of
/// `controlled` pages. The controlled pages form the target set.
pub fn strongly_connected(n: usize, extra: usize, controlled: usize, facultative: usize, seed: u64) -> LinkGraph {
    assert!(n >= 3 && controlled >= 1 && controlled <= n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut obligatory: BTreeSet<Link> = (0..n).map(|k| (perm[k], perm[(k + 1) % n])).collect();
    let max_arcs = n * (n - 1);
    let budget = (obligatory.len() + extra).min(max_arcs - facultative.min(max_arcs));
    while obligatory.len() < budget {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            obligatory.insert((i, j));
        }
    }
    let pages: Vec<usize> = perm[..controlled].to_vec();
    let free: Vec<Link> = pages
        .iter()
        .flat_map(|&i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .filter(|a| !obligatory.contains(a))
        .collect();
    let fac = pick(&mut rng, free, facultative);
    LinkGraph::new(n, obligatory, [], fac, pages, false).expect("generated graph is valid")
}

/// Directed preferential-attachment graph: node `k` links to `m` earlier
/// nodes drawn proportionally to in-degree + 1. `controlled` pages (chosen
/// uniformly) receive `facultative` candidate arcs in total, spread evenly.
pub fn scale_free(n: usize, m: usize, controlled: usize, facultative: usize, seed: u64) -> LinkGraph {
    assert!(n > m + 1 && controlled >= 1 && controlled <= n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obligatory = BTreeSet::new();
    // every node appears once for the +1 term, then once per in-link
    let mut urn: Vec<usize> = (0..=m).collect();
    for i in 0..=m {
        for j in 0..=m {
            if i != j {
                obligatory.insert((i, j));
                urn.push(j);
            }
        }
    }
    for k in (m + 1)..n {
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            chosen.insert(urn[rng.gen_range(0..urn.len())]);
        }
        for &j in &chosen {
            obligatory.insert((k, j));
            urn.push(j);
        }
        urn.push(k);
    }
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);
    let pages: Vec<usize> = nodes[..controlled].to_vec();
    let per_page = facultative.div_ceil(controlled);
    let mut fac = Vec::with_capacity(facultative);
    for &i in &pages {
        let mut picked = BTreeSet::new();
        while picked.len() < per_page && fac.len() + picked.len() < facultative {
            let j = rng.gen_range(0..n);
            if j != i && !obligatory.contains(&(i, j)) {
                picked.insert(j);
            }
        }
        fac.extend(picked.into_iter().map(|j| (i, j)));
    }
    LinkGraph::new(n, obligatory, [], fac, pages, false).expect("generated graph is valid")
}

fn pick<R: Rng>(rng: &mut R, mut pool: Vec<Link>, count: usize) -> Vec<Link> {
    pool.shuffle(rng);
    pool.truncate(count);
    pool
}

/// Uniform weights in `[lo, hi]`.
pub fn random_weights(len: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(lo..=hi)).collect()
}
