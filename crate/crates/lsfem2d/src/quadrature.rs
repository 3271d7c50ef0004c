//! Fixed Gaussian quadrature rules on the reference triangle and unit interval.
//!
//! Triangle rules are symmetric and stated in barycentric coordinates with
//! weights summing to the reference area 1/2; edge rules are Gauss-Legendre on
//! [0, 1] with weights summing to 1.

use crate::{Error, Result};

/// A quadrature rule in reference coordinates.
///
/// For triangle rules `points[i]` holds barycentric coordinates
/// `(l0, l1, l2)`; for edge rules the first entry is the parameter `t` on
/// [0, 1] and the remaining entries are unused.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn orbit1(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, w: f64) {
    points.push([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
    weights.push(w);
}

/// Push the three permutations of (a, b, b), a = 1 - 2b.
fn orbit3(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, b: f64, w: f64) {
    let a = 1.0 - 2.0 * b;
    points.push([a, b, b]);
    points.push([b, a, b]);
    points.push([b, b, a]);
    weights.push(w);
    weights.push(w);
    weights.push(w);
}

/// Push the six permutations of (a, b, c), c = 1 - a - b.
fn orbit6(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        points.push(p);
        weights.push(w);
    }
}

/// Symmetric rule on the reference triangle, exact for the requested total degree.
pub fn triangle_rule(degree: usize) -> Result<QuadRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match degree {
        1 => orbit1(&mut points, &mut weights, 1.0),
        2 => orbit3(&mut points, &mut weights, 1.0 / 6.0, 1.0 / 3.0),
        4 => {
            orbit3(&mut points, &mut weights, 0.445948490915965, 0.223381589678011);
            orbit3(&mut points, &mut weights, 0.091576213509771, 0.109951743655322);
        }
        6 => {
            orbit3(&mut points, &mut weights, 0.249286745170910, 0.116786275726379);
            orbit3(&mut points, &mut weights, 0.063089014491502, 0.050844906370207);
            orbit6(
                &mut points,
                &mut weights,
                0.053145049844816,
                0.310352451033785,
                0.082851075618374,
            );
        }
        d => {
            return Err(Error::InvalidArgument(format!(
                "unsupported triangle quadrature degree {d} (supported: 1, 2, 4, 6)"
            )))
        }
    }
    // Tabulated weights sum to 1; scale to the reference area 1/2.
    for w in &mut weights {
        *w *= 0.5;
    }
    Ok(QuadRule {
        points,
        weights,
        degree,
    })
}

/// Gauss-Legendre rule on [0, 1] with the given number of points.
pub fn edge_rule(npoints: usize) -> Result<QuadRule> {
    let (ts, ws): (Vec<f64>, Vec<f64>) = match npoints {
        2 => {
            let d = 0.5 / 3.0_f64.sqrt();
            (vec![0.5 - d, 0.5 + d], vec![0.5, 0.5])
        }
        3 => {
            let d = 0.5 * 0.6_f64.sqrt();
            (
                vec![0.5 - d, 0.5, 0.5 + d],
                vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
            )
        }
        n => {
            return Err(Error::InvalidArgument(format!(
                "unsupported edge quadrature point count {n} (supported: 2, 3)"
            )))
        }
    };
    Ok(QuadRule {
        points: ts.iter().map(|&t| [t, 0.0, 0.0]).collect(),
        weights: ws,
        degree: 2 * npoints - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_monomial(rule: &QuadRule, p: u32, q: u32) -> f64 {
        // On the reference triangle with vertices (0,0), (1,0), (0,1):
        // x = l1, y = l2.
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| w * l[1].powi(p as i32) * l[2].powi(q as i32))
            .sum()
    }

    fn exact_monomial(p: u32, q: u32) -> f64 {
        // int_T x^p y^q = p! q! / (p + q + 2)!
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>().max(1.0);
        fact(p) * fact(q) / fact(p + q + 2)
    }

    #[test]
    fn degree1_is_centroid() {
        let r = triangle_rule(1).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.weights[0] - 0.5).abs() < 1e-15);
        assert!((r.points[0][0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_reference_area() {
        for d in [1, 2, 4, 6] {
            let r = triangle_rule(d).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 0.5).abs() < 1e-14, "degree {d}: sum {s}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn monomial_exactness_exhaustive() {
        for d in [1usize, 2, 4, 6] {
            let r = triangle_rule(d).unwrap();
            for p in 0..=d as u32 {
                for q in 0..=(d as u32 - p) {
                    let got = integrate_monomial(&r, p, q);
                    let want = exact_monomial(p, q);
                    assert!(
                        (got - want).abs() < 1e-14,
                        "degree {d} monomial x^{p} y^{q}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn x2y_with_degree4() {
        let r = triangle_rule(4).unwrap();
        assert!((integrate_monomial(&r, 2, 1) - 1.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn edge_rules() {
        let r2 = edge_rule(2).unwrap();
        let s: f64 = r2.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        // 2-point rule integrates cubics exactly.
        let cubic: f64 = r2
            .points
            .iter()
            .zip(&r2.weights)
            .map(|(p, w)| w * p[0].powi(3))
            .sum();
        assert!((cubic - 0.25).abs() < 1e-15);

        let r3 = edge_rule(3).unwrap();
        let quintic: f64 = r3
            .points
            .iter()
            .zip(&r3.weights)
            .map(|(p, w)| w * p[0].powi(5))
            .sum();
        assert!((quintic - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degree_errors() {
        assert!(triangle_rule(3).is_err());
        assert!(edge_rule(4).is_err());
    }
}
