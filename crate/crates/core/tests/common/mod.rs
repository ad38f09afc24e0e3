#![allow(dead_code)]

use surgeflow_core::{MassVector, MetricSpace, Rational, Scalar};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

pub fn mass(v: &[(i64, i64)]) -> MassVector<Rational> {
    MassVector::new(v.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
}

/// Six-vertex network of the worked example, 0-based.
pub fn example_metric() -> MetricSpace<Rational> {
    let edges = [
        (0, 1, 1),
        (1, 2, 1),
        (3, 4, 1),
        (4, 5, 1),
        (0, 2, 2),
        (3, 5, 2),
        (0, 3, 1),
        (0, 4, 2),
        (0, 5, 3),
        (1, 3, 2),
        (1, 4, 1),
        (1, 5, 2),
        (2, 3, 3),
        (2, 4, 2),
        (2, 5, 1),
    ];
    let mut m = vec![vec![q(0, 1); 6]; 6];
    for (u, v, w) in edges {
        m[u][v] = q(w, 1);
        m[v][u] = q(w, 1);
    }
    MetricSpace::new(m).unwrap()
}

pub fn example_supply() -> MassVector<Rational> {
    mass(&[(1, 3), (1, 3), (1, 3), (0, 1), (0, 1), (0, 1)])
}

pub fn example_demand() -> MassVector<Rational> {
    mass(&[(0, 1), (0, 1), (1, 8), (3, 8), (3, 8), (1, 8)])
}

/// First optimal flow of the example.
pub fn example_flow_a() -> Vec<(usize, usize, Rational)> {
    vec![(2, 2, q(1, 8)), (2, 5, q(1, 8)), (2, 4, q(1, 12)), (1, 4, q(7, 24)), (1, 3, q(1, 24)), (0, 3, q(1, 3))]
}

/// Second optimal flow of the example.
pub fn example_flow_b() -> Vec<(usize, usize, Rational)> {
    vec![(2, 2, q(1, 8)), (2, 5, q(1, 8)), (2, 4, q(1, 24)), (2, 3, q(1, 24)), (1, 4, q(1, 3)), (0, 3, q(1, 3))]
}

/// Metric with integer distances in `1..=max_w` repaired by shortest paths.
pub fn closure_metric(k: usize, weights: &[i64]) -> MetricSpace<Rational> {
    let mut edges = Vec::new();
    let mut it = weights.iter().cycle();
    for u in 0..k {
        for v in u + 1..k {
            edges.push((u, v, q(*it.next().unwrap(), 1)));
        }
    }
    MetricSpace::shortest_path_closure(k, &edges).unwrap()
}

/// Mass vector from integer weights over a common denominator.
pub fn from_weights(w: &[u32]) -> MassVector<Rational> {
    MassVector::from_counts(&w.iter().map(|&x| x as usize).collect::<Vec<_>>()).unwrap()
}

/// Two-vertex sequence with `a[t]` the demand at vertex 0.
pub fn two_vertex(c: Rational, a: &[Rational]) -> surgeflow_core::DemandSequence<Rational> {
    let steps = a.iter().map(|x| MassVector::new(vec![x.clone(), q(1, 1) - x.clone()]).unwrap()).collect();
    surgeflow_core::DemandSequence::new(steps, MetricSpace::uniform(2, c).unwrap()).unwrap()
}

/// Best welfare over two-vertex supply sequences whose mass at vertex 0 is
/// a multiple of `1/steps`, by exhaustive enumeration. Returns the value
/// and the maximizing positions.
pub fn grid_optimum(c: &Rational, a: &[Rational], steps: i64) -> (Rational, Vec<Rational>) {
    let grid: Vec<Rational> = (0..=steps).map(|i| q(i, steps)).collect();
    let served = |x: &Rational, at: &Rational| {
        let one = q(1, 1);
        (if x < at { x.clone() } else { at.clone() })
            + (if one.clone() - x < one.clone() - at { one.clone() - x } else { one - at })
    };
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    let mut idx = vec![0usize; a.len()];
    loop {
        let xs: Vec<Rational> = idx.iter().map(|&i| grid[i].clone()).collect();
        let mut sw = q(0, 1);
        for (t, x) in xs.iter().enumerate() {
            sw += served(x, &a[t]);
            if t > 0 {
                let step = x - &xs[t - 1];
                sw -= c * if step < q(0, 1) { -step } else { step };
            }
        }
        if best.as_ref().is_none_or(|(b, _)| sw > *b) {
            best = Some((sw, xs));
        }
        let mut pos = 0;
        while pos < idx.len() && idx[pos] == grid.len() - 1 {
            idx[pos] = 0;
            pos += 1;
        }
        if pos == idx.len() {
            break;
        }
        idx[pos] += 1;
    }
    best.unwrap()
}
