use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row-major f64 matrix; rows are distributions when used for parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Self {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{what} must have length {expected}, got {got}")]
    BadLength {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what} entry {index} = {value} is outside [0, 1]")]
    OutOfRange {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{what} row {row} sums to {sum}, not 1 within {ROW_SUM_TOL}")]
    RowSum { what: &'static str, row: usize, sum: f64 },
    #[error("sample spaces must be nonempty (nx = {nx}, nz = {nz})")]
    EmptySpace { nx: usize, nz: usize },
    #[error("invalid model JSON: {0}")]
    Json(String),
}

/// A finite discrete model: fixed marginals and the two conditional
/// parameter matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularModel {
    /// Data marginal q(x), length nx.
    pub q_x: Vec<f64>,
    /// Prior p(z), length nz.
    pub p_z: Vec<f64>,
    /// nx×nz; row i is q(z|x=i).
    pub theta_q: Matrix,
    /// nz×nx; row j is p(x|z=j).
    pub theta_p: Matrix,
}

fn check_prob_vector(what: &'static str, v: &[f64]) -> Result<(), ModelError> {
    for (i, &x) in v.iter().enumerate() {
        if !(0.0..=1.0 + ROW_SUM_TOL).contains(&x) || x.is_nan() {
            return Err(ModelError::OutOfRange {
                what,
                index: i,
                value: x,
            });
        }
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(ModelError::RowSum { what, row: 0, sum });
    }
    Ok(())
}

fn check_stochastic(what: &'static str, m: &Matrix) -> Result<(), ModelError> {
    for r in 0..m.rows {
        for (i, &x) in m.row(r).iter().enumerate() {
            if !(0.0..=1.0 + ROW_SUM_TOL).contains(&x) || x.is_nan() {
                return Err(ModelError::OutOfRange {
                    what,
                    index: r * m.cols + i,
                    value: x,
                });
            }
        }
        let sum: f64 = m.row(r).iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(ModelError::RowSum { what, row: r, sum });
        }
    }
    Ok(())
}

impl TabularModel {
    pub fn new(
        q_x: Vec<f64>,
        p_z: Vec<f64>,
        theta_q: Matrix,
        theta_p: Matrix,
    ) -> Result<Self, ModelError> {
        let nx = q_x.len();
        let nz = p_z.len();
        if nx == 0 || nz == 0 {
            return Err(ModelError::EmptySpace { nx, nz });
        }
        if theta_q.rows != nx || theta_q.cols != nz {
            return Err(ModelError::BadLength {
                what: "theta_q",
                expected: nx * nz,
                got: theta_q.rows * theta_q.cols,
            });
        }
        if theta_p.rows != nz || theta_p.cols != nx {
            return Err(ModelError::BadLength {
                what: "theta_p",
                expected: nx * nz,
                got: theta_p.rows * theta_p.cols,
            });
        }
        check_prob_vector("q_x", &q_x)?;
        check_prob_vector("p_z", &p_z)?;
        check_stochastic("theta_q", &theta_q)?;
        check_stochastic("theta_p", &theta_p)?;
        Ok(Self {
            q_x,
            p_z,
            theta_q,
            theta_p,
        })
    }

    pub fn nx(&self) -> usize {
        self.q_x.len()
    }

    pub fn nz(&self) -> usize {
        self.p_z.len()
    }

    /// All derived distributions of the model.
    pub fn distributions(&self) -> ModelDistributions {
        let (nx, nz) = (self.nx(), self.nz());
        let mut p_joint = Matrix::zeros(nx, nz);
        let mut q_joint = Matrix::zeros(nx, nz);
        for i in 0..nx {
            for j in 0..nz {
                p_joint.set(i, j, self.p_z[j] * self.theta_p.get(j, i));
                q_joint.set(i, j, self.q_x[i] * self.theta_q.get(i, j));
            }
        }
        let p_x: Vec<f64> = (0..nx).map(|i| (0..nz).map(|j| p_joint.get(i, j)).sum()).collect();
        let q_z: Vec<f64> = (0..nz).map(|j| (0..nx).map(|i| q_joint.get(i, j)).sum()).collect();
        // conditionals of zero-mass events are uniform; they are always
        // weighted by zero mass downstream
        let mut p_z_given_x = Matrix::zeros(nx, nz);
        for i in 0..nx {
            for j in 0..nz {
                let v = if p_x[i] > 0.0 {
                    p_joint.get(i, j) / p_x[i]
                } else {
                    1.0 / nz as f64
                };
                p_z_given_x.set(i, j, v);
            }
        }
        let mut q_x_given_z = Matrix::zeros(nx, nz);
        for j in 0..nz {
            for i in 0..nx {
                let v = if q_z[j] > 0.0 {
                    q_joint.get(i, j) / q_z[j]
                } else {
                    1.0 / nx as f64
                };
                q_x_given_z.set(i, j, v);
            }
        }
        let h_qx = -self
            .q_x
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x * x.ln())
            .sum::<f64>();
        ModelDistributions {
            p_joint,
            q_joint,
            p_x,
            q_z,
            p_z_given_x,
            q_x_given_z,
            h_qx,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "q_x": self.q_x,
            "p_z": self.p_z,
            "theta_q": rows_of(&self.theta_q),
            "theta_p": rows_of(&self.theta_p),
        })
        .to_string()
    }

    /// Strict load: shape and stochasticity are validated before anything
    /// else sees the model.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        #[derive(Deserialize)]
        struct Raw {
            q_x: Vec<f64>,
            p_z: Vec<f64>,
            theta_q: Vec<Vec<f64>>,
            theta_p: Vec<Vec<f64>>,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        Self::new(
            raw.q_x,
            raw.p_z,
            Matrix::from_rows(raw.theta_q),
            Matrix::from_rows(raw.theta_p),
        )
    }
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows).map(|r| m.row(r).to_vec()).collect()
}

/// Joint distributions, derived marginals/conditionals and the data
/// entropy for one model.
#[derive(Debug, Clone)]
pub struct ModelDistributions {
    /// nx×nz, p(x=i, z=j).
    pub p_joint: Matrix,
    /// nx×nz, q(x=i, z=j).
    pub q_joint: Matrix,
    /// Model marginal p(x).
    pub p_x: Vec<f64>,
    /// Model marginal q(z).
    pub q_z: Vec<f64>,
    /// nx×nz, p(z=j|x=i).
    pub p_z_given_x: Matrix,
    /// nx×nz, q(x=i|z=j).
    pub q_x_given_z: Matrix,
    /// Entropy of q(x) in nats.
    pub h_qx: f64,
}

/// The strictly feasible construction: p(x|z) = q(x) for every z and
/// q(z|x) = p(z) for every x, making the two joints coincide exactly.
pub fn feasible_model(q_x: &[f64], p_z: &[f64]) -> Result<TabularModel, ModelError> {
    let nx = q_x.len();
    let nz = p_z.len();
    let theta_q = Matrix::from_rows(vec![p_z.to_vec(); nx]);
    let theta_p = Matrix::from_rows(vec![q_x.to_vec(); nz]);
    TabularModel::new(q_x.to_vec(), p_z.to_vec(), theta_q, theta_p)
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn feasible_model_joints_coincide() {
        let m = feasible_model(&[0.9, 0.1], &[0.25, 0.25, 0.5]).unwrap();
        let d = m.distributions();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(d.p_joint.get(i, j), d.q_joint.get(i, j));
            }
        }
    }

    #[test]
    fn hand_multiplied_joints() {
        // nx = nz = 2, uniform marginals, near-identity conditionals
        let m = TabularModel::new(
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            Matrix::from_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
            Matrix::from_rows(vec![vec![0.7, 0.3], vec![0.4, 0.6]]),
        )
        .unwrap();
        let d = m.distributions();
        assert!((d.q_joint.get(0, 0) - 0.5 * 0.9).abs() < 1e-15);
        assert!((d.q_joint.get(1, 0) - 0.5 * 0.2).abs() < 1e-15);
        assert!((d.p_joint.get(0, 1) - 0.5 * 0.4).abs() < 1e-15);
        assert!((d.p_joint.get(1, 1) - 0.5 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn marginalization_consistency() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let m = test_support::random_model(&mut rng, 4, 3);
            let d = m.distributions();
            let pj_sum: f64 = d.p_joint.data.iter().sum();
            let qj_sum: f64 = d.q_joint.data.iter().sum();
            assert!((pj_sum - 1.0).abs() < 1e-12);
            assert!((qj_sum - 1.0).abs() < 1e-12);
            for j in 0..m.nz() {
                let over_x: f64 = (0..m.nx()).map(|i| d.p_joint.get(i, j)).sum();
                assert!((over_x - m.p_z[j]).abs() < 1e-12);
            }
            for i in 0..m.nx() {
                let over_z: f64 = (0..m.nz()).map(|j| d.q_joint.get(i, j)).sum();
                assert!((over_z - m.q_x[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_mass_conditionals_are_uniform() {
        let m = TabularModel::new(
            vec![0.5, 0.5],
            vec![1.0, 0.0],
            Matrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]]),
            Matrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
        )
        .unwrap();
        let d = m.distributions();
        // q(z=1) = 0, so q(x|z=1) falls back to uniform
        assert_eq!(d.q_x_given_z.get(0, 1), 0.5);
        assert_eq!(d.q_x_given_z.get(1, 1), 0.5);
    }

    #[test]
    fn validation_rejects_bad_rows() {
        let bad = TabularModel::new(
            vec![0.6, 0.6],
            vec![1.0],
            Matrix::from_rows(vec![vec![1.0], vec![1.0]]),
            Matrix::from_rows(vec![vec![0.5, 0.5]]),
        );
        assert!(matches!(bad, Err(ModelError::RowSum { .. })));
        let bad = TabularModel::new(
            vec![1.0],
            vec![1.5, -0.5],
            Matrix::from_rows(vec![vec![0.5, 0.5]]),
            Matrix::from_rows(vec![vec![1.0], vec![1.0]]),
        );
        assert!(matches!(bad, Err(ModelError::OutOfRange { .. })));
    }

    #[test]
    fn json_round_trip_and_strict_load() {
        let m = feasible_model(&[0.3, 0.7], &[0.5, 0.5]).unwrap();
        let text = m.to_json();
        let back = TabularModel::from_json(&text).unwrap();
        assert_eq!(m, back);
        assert!(TabularModel::from_json("{\"q_x\": [1.0]}").is_err());
        let invalid = r#"{"q_x":[0.5,0.6],"p_z":[1.0],
            "theta_q":[[1.0],[1.0]],"theta_p":[[0.5,0.5]]}"#;
        assert!(TabularModel::from_json(invalid).is_err());
    }
}
