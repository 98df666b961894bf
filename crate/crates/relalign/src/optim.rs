//! Shared Adam optimizer used by both embedding training and projection
//! estimation, so the two stages differ only in their objective.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Adam hyperparameters. The learning rate is the only knob the experiments
/// vary; beta/epsilon keep the optimizer's standard defaults.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        AdamConfig {
            learning_rate,
            ..AdamConfig::default()
        }
    }
}

/// Per-parameter first/second moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    t: u64,
    m: Array2<f64>,
    v: Array2<f64>,
}

/// Row-addressable parameter storage. `Array2` is the plain case; hogwild
/// training substitutes an unsynchronized shared view.
pub trait ParamRows {
    fn shape(&self) -> (usize, usize);
    fn row_mut(&mut self, row: usize) -> &mut [f64];
}

impl ParamRows for Array2<f64> {
    fn shape(&self) -> (usize, usize) {
        self.dim()
    }

    fn row_mut(&mut self, row: usize) -> &mut [f64] {
        self.row_mut(row).into_slice().expect("contiguous row")
    }
}

impl AdamState {
    pub fn new(shape: (usize, usize), cfg: AdamConfig) -> Self {
        AdamState {
            cfg,
            t: 0,
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn config(&self) -> &AdamConfig {
        &self.cfg
    }

    /// One bias-corrected Adam update applied in place.
    ///
    /// A non-finite gradient skips the step and leaves the state untouched.
    pub fn step(&mut self, params: &mut Array2<f64>, grads: &Array2<f64>) -> Result<()> {
        if params.dim() != self.m.dim() || grads.dim() != self.m.dim() {
            return Err(Error::ShapeMismatch(format!(
                "params {:?} / grads {:?} vs state {:?}",
                params.dim(),
                grads.dim(),
                self.m.dim()
            )));
        }
        if !grads.iter().all(|g| g.is_finite()) {
            return Err(Error::NonFiniteGradient);
        }
        self.t += 1;
        let (c1, c2) = self.corrections();
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.cfg;
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }

    /// Sparse variant: one step that touches only the given rows, sharing the
    /// global step counter. Rows not listed keep their moments unchanged.
    pub fn step_rows<P, 'a, I>(&mut self, params: &mut P, row_grads: I) -> Result<()>
    where
        P: ParamRows,
        I: IntoIterator<Item = (usize, &'a [f64])> + Clone,
    {
        let (rows, cols) = self.m.dim();
        if params.shape() != (rows, cols) {
            return Err(Error::ShapeMismatch(format!(
                "params {:?} vs state {:?}",
                params.shape(),
                (rows, cols)
            )));
        }
        for (row, g) in row_grads.clone() {
            if row >= rows || g.len() != cols {
                return Err(Error::ShapeMismatch(format!("row {row} grad len {}", g.len())));
            }
            if !g.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFiniteGradient);
            }
        }
        self.t += 1;
        let (c1, c2) = self.corrections();
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.cfg;
        for (row, g) in row_grads {
            let p = params.row_mut(row);
            let m = self.m.row_mut(row).into_slice().expect("contiguous row");
            let v = self.v.row_mut(row).into_slice().expect("contiguous row");
            for k in 0..cols {
                m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                p[k] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }

    fn corrections(&self) -> (f64, f64) {
        (
            1.0 - self.cfg.beta1.powi(self.t as i32),
            1.0 - self.cfg.beta2.powi(self.t as i32),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn scalar_state(lr: f64) -> (AdamState, Array2<f64>) {
        (
            AdamState::new((1, 1), AdamConfig::with_learning_rate(lr)),
            array![[1.0]],
        )
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let (mut state, mut params) = scalar_state(0.01);
        state.step(&mut params, &array![[0.0]]).unwrap();
        assert_eq!(params[[0, 0]], 1.0);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        // bias correction makes the first update lr * g/(|g| + eps-ish),
        // so the magnitude is ~lr regardless of gradient scale
        for g in [1.0, 1e-6, 1e4] {
            let (mut state, mut params) = scalar_state(0.01);
            state.step(&mut params, &array![[g]]).unwrap();
            let delta = 1.0 - params[[0, 0]];
            assert!(
                (delta - 0.01).abs() < 1e-6,
                "gradient {g} moved params by {delta}"
            );
        }
    }

    #[test]
    fn scalar_quadratic_converges() {
        // minimize x^2 from x = 1
        let mut state = AdamState::new((1, 1), AdamConfig::with_learning_rate(1e-2));
        let mut params = array![[1.0]];
        for _ in 0..2000 {
            let grad = array![[2.0 * params[[0, 0]]]];
            state.step(&mut params, &grad).unwrap();
        }
        assert!(params[[0, 0]].abs() < 1e-3, "x = {}", params[[0, 0]]);
    }

    #[test]
    fn deterministic_update() {
        let run = || {
            let mut state = AdamState::new((2, 3), AdamConfig::default());
            let mut params = Array2::from_shape_fn((2, 3), |(i, j)| (i + j) as f64);
            let grads = Array2::from_shape_fn((2, 3), |(i, j)| 0.1 * (i as f64) - 0.2 * (j as f64));
            for _ in 0..50 {
                state.step(&mut params, &grads).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_gradient_skips_step() {
        let (mut state, mut params) = scalar_state(0.01);
        state.step(&mut params, &array![[1.0]]).unwrap();
        let before = params.clone();
        let err = state.step(&mut params, &array![[f64::NAN]]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient));
        assert_eq!(params, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut state = AdamState::new((2, 2), AdamConfig::default());
        let mut params = Array2::zeros((2, 3));
        assert!(state.step(&mut params, &Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn row_step_matches_dense_on_touched_rows() {
        let cfg = AdamConfig::default();
        let grads = array![[0.5, -0.25], [0.0, 0.0], [1.5, 2.0]];

        let mut dense_state = AdamState::new((3, 2), cfg);
        let mut dense = Array2::from_elem((3, 2), 1.0);
        dense_state.step(&mut dense, &grads).unwrap();

        let mut row_state = AdamState::new((3, 2), cfg);
        let mut sparse = Array2::from_elem((3, 2), 1.0);
        let g0 = [0.5, -0.25];
        let g2 = [1.5, 2.0];
        row_state
            .step_rows(&mut sparse, vec![(0usize, &g0[..]), (2usize, &g2[..])])
            .unwrap();

        // row 1 had zero gradient in the dense run, so every row agrees
        assert_eq!(dense, sparse);
        assert_eq!(row_state.step_count(), 1);
    }
}
