//! Python bindings: the filter transfer function, spectra and iteration
//! histories, driven by the same TOML configs as the command line.

#[pyo3::pymodule]
mod waveholtz_py {
    use std::f64::consts::PI;

    use num_complex::Complex64;
    use pyo3::exceptions::{PyRuntimeError, PyValueError};
    use pyo3::prelude::*;
    use pyo3::types::PyDict;

    use waveholtz::experiment::verify::{run_checks, Level, VerifyOptions};
    use waveholtz::experiment::{iterate_point, spectrum_point, ExperimentConfig};
    use waveholtz::{filter, Error};

    fn to_py(e: Error) -> PyErr {
        match e.exit_code() {
            2 => PyValueError::new_err(e.to_string()),
            _ => PyRuntimeError::new_err(e.to_string()),
        }
    }

    fn config(toml: &str) -> PyResult<ExperimentConfig> {
        ExperimentConfig::from_toml(toml).map_err(to_py)
    }

    /// `β̂(z)`, the filter transfer function at a scaled eigenvalue.
    #[pyfunction]
    fn beta_hat(z: Complex64) -> Complex64 {
        filter::beta_hat(z)
    }

    #[pyfunction]
    fn parabolic_distance(z: Complex64) -> f64 {
        filter::parabolic_distance(z)
    }

    /// Spectral report for a config at its single frequency.
    #[pyfunction]
    #[pyo3(signature = (config_toml = ""))]
    fn spectrum<'py>(py: Python<'py>, config_toml: &str) -> PyResult<Bound<'py, PyDict>> {
        let cfg = config(config_toml)?;
        let point = spectrum_point(&cfg, PI * cfg.omega_over_pi).map_err(to_py)?;
        let s = point.spectrum.expect("spectrum computed");
        let d = PyDict::new(py);
        d.set_item("omega", s.omega)?;
        d.set_item("eigenvalues", s.eigenvalues.clone())?;
        d.set_item("eps_star", s.epsilon_star())?;
        d.set_item("lambda_star", s.lambda_star.lambda)?;
        d.set_item("kappa", s.kappa)?;
        d.set_item("rho_filtered", s.rho_filtered)?;
        d.set_item("max_real_part", s.max_real_part)?;
        Ok(d)
    }

    /// Residual history of the iteration for a config at its single frequency.
    #[pyfunction]
    #[pyo3(signature = (config_toml = ""))]
    fn iterate<'py>(py: Python<'py>, config_toml: &str) -> PyResult<Bound<'py, PyDict>> {
        let cfg = config(config_toml)?;
        let point = iterate_point(&cfg, PI * cfg.omega_over_pi, false).map_err(to_py)?;
        let it = point.iteration.expect("iteration ran");
        let d = PyDict::new(py);
        d.set_item("omega", point.omega)?;
        d.set_item("dofs", point.dofs)?;
        d.set_item("n_steps", point.tgrid.n_steps)?;
        d.set_item("residuals", it.residuals)?;
        d.set_item("iterations", it.iterations)?;
        d.set_item("converged_at_start", it.converged_at_start)?;
        Ok(d)
    }

    /// `(name, passed, detail)` for each quick self-check.
    #[pyfunction]
    #[pyo3(signature = (seed = 0))]
    fn verify_quick(seed: u64) -> Vec<(String, bool, String)> {
        let opts = VerifyOptions {
            level: Level::Quick,
            corrupt_filter: false,
        };
        run_checks(opts, seed)
            .into_iter()
            .map(|c| (c.check, c.passed, c.detail))
            .collect()
    }

    #[pymodule_init]
    fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
        m.add("ALPHA", filter::ALPHA)?;
        m.add("__version__", env!("CARGO_PKG_VERSION"))
    }
}
