//! Self-maps `T: R^d -> R^d` and the samplers that feed them.

use crate::error::{Error, Result};
use crate::linalg::{self, Lu};
use crate::nnorm::validate_vectors;
use crate::quotient::{enumerate_class, AnchorSet};
use crate::rng::{uniform, SampleRng};
use serde::{Deserialize, Serialize};

/// Anything that maps a point of `R^d` to another point of `R^d`.
pub trait SelfMap {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl<F> SelfMap for F
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self(x))
    }
}

/// Built-in nonlinear maps, selected by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisteredMap {
    /// `x -> sin(x) / 2`, componentwise.
    HalfSin,
    /// `x -> cos(x) / 2`, componentwise.
    HalfCos,
    /// `x -> tanh(x) / 2 + 1/4`, componentwise.
    DampedTanh,
}

impl RegisteredMap {
    pub const NAMES: [&'static str; 3] = ["half-sin", "half-cos", "damped-tanh"];

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "half-sin" => Ok(Self::HalfSin),
            "half-cos" => Ok(Self::HalfCos),
            "damped-tanh" => Ok(Self::DampedTanh),
            other => Err(Error::UnknownMapping(other.to_string())),
        }
    }

    fn eval(self, v: f64) -> f64 {
        match self {
            Self::HalfSin => 0.5 * v.sin(),
            Self::HalfCos => 0.5 * v.cos(),
            Self::DampedTanh => 0.5 * v.tanh() + 0.25,
        }
    }
}

/// JSON-describable maps:
///
/// ```json
/// {"kind": "affine", "A": [[0.5, 0], [0, 0.25]], "b": [1, 1]}
/// {"kind": "scaling", "c": 0.5}
/// {"kind": "registered", "name": "half-cos"}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mapping {
    Affine {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Scaling {
        c: f64,
    },
    Registered {
        name: String,
    },
}

impl Mapping {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let map: Mapping = serde_json::from_str(text).map_err(|e| e.to_string())?;
        map.validate().map_err(|e| e.to_string())?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Mapping::Affine { a, b } => {
                let d = b.len();
                if a.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: a.len(),
                    });
                }
                validate_vectors(a, d)?;
                validate_vectors(&[b], d)
            }
            Mapping::Scaling { c } if !c.is_finite() => {
                Err(Error::InvalidParameter(format!("scaling factor {c} is not finite")))
            }
            Mapping::Scaling { .. } => Ok(()),
            Mapping::Registered { name } => RegisteredMap::from_name(name).map(|_| ()),
        }
    }

    /// Dimension the map is defined on, if fixed.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Mapping::Affine { b, .. } => Some(b.len()),
            _ => None,
        }
    }

    /// Exact contraction constant with respect to the class-`m` norms of
    /// `anchors`, where one can be computed.
    ///
    /// Scalings `x -> c x` contract every norm by `|c|`. For affine maps with
    /// `d = n`, writing `x = sum a_j y_j` turns every class-1 norm into
    /// `|det Y| |a_i|`, so with `B = Y^-1 A Y` the induced constant on subset
    /// `S` is the 1-norm of the block `B[S, S]`, provided `B[S, S^c]`
    /// vanishes (otherwise the map does not respect the quotient and the
    /// constant is infinite).
    pub fn certified_contraction(&self, anchors: &AnchorSet, m: usize) -> Result<f64> {
        match self {
            Mapping::Scaling { c } => Ok(c.abs()),
            Mapping::Registered { name } => Err(Error::CertificationUnavailable(format!(
                "no exact bound for registered map {name:?}"
            ))),
            Mapping::Affine { a, .. } => {
                let (n, d) = (anchors.n(), anchors.d());
                if a.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: a.len(),
                    });
                }
                if n != d {
                    return Err(Error::CertificationUnavailable(format!(
                        "affine certification needs d = n (d = {d}, n = {n})"
                    )));
                }
                let b = anchor_coordinates(a, anchors)?;
                let magnitude = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                let negligible = anchors.params().rel_tol() * magnitude.max(1.0);
                let mut worst: f64 = 0.0;
                for s in enumerate_class(n, m)?.subsets {
                    let inside: Vec<usize> = s.indices().iter().map(|i| i - 1).collect();
                    let leaks = inside.iter().any(|&r| {
                        (0..n)
                            .filter(|c| !s.contains(c + 1))
                            .any(|c| b[r * n + c].abs() > negligible)
                    });
                    if leaks {
                        return Ok(f64::INFINITY);
                    }
                    let block_norm = inside
                        .iter()
                        .map(|&c| inside.iter().map(|&r| b[r * n + c].abs()).sum::<f64>())
                        .fold(0.0f64, f64::max);
                    worst = worst.max(block_norm);
                }
                Ok(worst)
            }
        }
    }
}

/// `Y^-1 A Y` (row-major), with `Y` holding the anchors as columns.
fn anchor_coordinates(a: &[Vec<f64>], anchors: &AnchorSet) -> Result<Vec<f64>> {
    let n = anchors.n();
    let y = anchors.vectors();
    let mut ymat = vec![0.0; n * n];
    for (j, col) in y.iter().enumerate() {
        for r in 0..n {
            ymat[r * n + j] = col[r];
        }
    }
    let lu = Lu::new(&ymat, n)?;
    let mut b = vec![0.0; n * n];
    for (j, col) in y.iter().enumerate() {
        let ay: Vec<f64> = a.iter().map(|row| linalg::dot(row, col)).collect();
        let coords = lu.solve(&ay)?;
        for r in 0..n {
            b[r * n + j] = coords[r];
        }
    }
    Ok(b)
}

impl SelfMap for Mapping {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Mapping::Affine { a, b } => {
                if x.len() != b.len() {
                    return Err(Error::DimensionMismatch {
                        expected: b.len(),
                        found: x.len(),
                    });
                }
                Ok(a.iter().zip(b).map(|(row, bi)| linalg::dot(row, x) + bi).collect())
            }
            Mapping::Scaling { c } => Ok(x.iter().map(|v| c * v).collect()),
            Mapping::Registered { name } => {
                let f = RegisteredMap::from_name(name)?;
                Ok(x.iter().map(|&v| f.eval(v)).collect())
            }
        }
    }
}

/// Uniform sampler on the box `center +- radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSampler {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl DomainSampler {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sampler radius {radius} must be positive"
            )));
        }
        validate_vectors(&[&center], center.len())?;
        Ok(Self { center, radius })
    }

    /// Box of half-width `radius` around the origin of `R^d`.
    pub fn origin_box(d: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; d], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn point(&self, rng: &mut SampleRng) -> Vec<f64> {
        self.center
            .iter()
            .map(|c| c + uniform(rng, -self.radius, self.radius))
            .collect()
    }

    pub fn pair(&self, rng: &mut SampleRng) -> (Vec<f64>, Vec<f64>) {
        let x = self.point(rng);
        let y = self.point(rng);
        (x, y)
    }
}

/// Points at prescribed class-`l` distances from a base point, for
/// continuity probes. Each radius gets `per_radius` random directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSampler {
    pub radii: Vec<f64>,
    pub per_radius: usize,
    pub seed: u64,
}

impl ProbeSampler {
    /// Geometric radii `start * ratio^k`, `k = 0..levels`.
    pub fn geometric(start: f64, ratio: f64, levels: usize, per_radius: usize, seed: u64) -> Self {
        let radii = (0..levels).map(|k| start * ratio.powi(k as i32)).collect();
        Self {
            radii,
            per_radius,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_json_forms() {
        let affine = Mapping::from_json(r#"{"kind":"affine","A":[[0.5,0],[0,0.25]],"b":[1,1]}"#).unwrap();
        assert_eq!(affine.apply(&[2.0, 4.0]).unwrap(), vec![2.0, 2.0]);
        let scale = Mapping::from_json(r#"{"kind":"scaling","c":0.5}"#).unwrap();
        assert_eq!(scale.apply(&[8.0, -8.0]).unwrap(), vec![4.0, -4.0]);
        let reg = Mapping::from_json(r#"{"kind":"registered","name":"half-sin"}"#).unwrap();
        assert_eq!(reg.apply(&[0.0]).unwrap(), vec![0.0]);
        assert!(Mapping::from_json(r#"{"kind":"registered","name":"nope"}"#).is_err());
        assert!(Mapping::from_json(r#"{"kind":"affine","A":[[1,0]],"b":[1,1]}"#).is_err());
        assert!(Mapping::from_json(r#"{"kind":"rotation"}"#).is_err());
        assert!(affine.apply(&[1.0]).is_err());
    }

    #[test]
    fn certified_constants() {
        let y = AnchorSet::standard_basis(2, 2, 2.0).unwrap();
        let diag = Mapping::Affine {
            a: vec![vec![0.5, 0.0], vec![0.0, 0.25]],
            b: vec![0.0, 0.0],
        };
        assert!((diag.certified_contraction(&y, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((diag.certified_contraction(&y, 2).unwrap() - 0.5).abs() < 1e-15);

        // Off-diagonal coupling breaks class-1 quotients but not class-n.
        let coupled = Mapping::Affine {
            a: vec![vec![0.5, 0.2], vec![0.1, 0.25]],
            b: vec![1.0, 0.0],
        };
        assert_eq!(coupled.certified_contraction(&y, 1).unwrap(), f64::INFINITY);
        assert!((coupled.certified_contraction(&y, 2).unwrap() - 0.6).abs() < 1e-15);

        assert_eq!(Mapping::Scaling { c: -0.3 }.certified_contraction(&y, 1).unwrap(), 0.3);
        let y3 = AnchorSet::standard_basis(2, 3, 2.0).unwrap();
        let wide = Mapping::Affine {
            a: vec![vec![0.5, 0.0, 0.0]; 3],
            b: vec![0.0; 3],
        };
        assert!(matches!(
            wide.certified_contraction(&y3, 1),
            Err(Error::CertificationUnavailable(_))
        ));
    }
}
