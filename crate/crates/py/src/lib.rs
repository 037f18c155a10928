use pyo3::prelude::*;

#[pymodule]
fn spectral_bandits_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
