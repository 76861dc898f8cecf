use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<R>(f: impl FnOnce(Python<'_>, &Bound<'_, PyModule>) -> R) -> R {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "darboux_py").unwrap();
        darboux_py::register(&m).unwrap();
        f(py, &m)
    })
}

fn run(py: Python<'_>, m: &Bound<'_, PyModule>, code: &str) -> PyResult<()> {
    let globals = PyDict::new(py);
    globals.set_item("d", m)?;
    py.run(&std::ffi::CString::new(code).unwrap(), Some(&globals), None)
}

#[test]
fn lame_identity_through_python() {
    with_module(|py, m| {
        run(
            py,
            m,
            r#"
w = d.Weierstrass(0.5)
s = d.LameSystem(0.5)
for x in (0.1, 0.7, 1.9):
    assert abs(w.wp(complex(x, s.tau)).real - s.potential(x)) < 1e-10
sn, cn, dn = d.jacobi_elliptic(0.8, 0.5)
assert abs(sn * sn + cn * cn - 1) < 1e-14 and abs(dn * dn + 0.5 * sn * sn - 1) < 1e-14
assert abs(s.e0 + 0.25) < 1e-15 and abs(s.e1p - 0.25) < 1e-15
"#,
        )
        .unwrap();
    });
}

#[test]
fn superpotential_gives_shifted_partner() {
    with_module(|py, m| {
        run(
            py,
            m,
            r#"
s = d.LameSystem(0.5)
a = d.Superpotential(0.5, 0.7)
for i in range(20):
    x = -2 + 0.2 * i
    assert abs(s.potential(x) + a.derivative(x) - s.potential(x + 0.7)) < 1e-8
al, da = a.sample(-1.0, 0.01, 201)
assert len(al) == 201 and len(da) == 201
"#,
        )
        .unwrap();
    });
}

#[test]
fn errors_map_to_python_exceptions() {
    with_module(|py, m| {
        let err = run(py, m, "d.LameSystem(1.5)").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = run(py, m, "d.chain_potential(0.5, [0.3], (-5.0, 5.0, 101))").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = run(py, m, "d.Weierstrass(0.5).wp(0j)").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyRuntimeError>(py));
    });
}

#[test]
fn spectral_probe_through_python() {
    with_module(|py, m| {
        run(
            py,
            m,
            r#"
s = d.LameSystem(0.25)
n = 801
dx = s.period / (n - 1)
edges = d.band_edges(s.sample(0.0, dx, n), dx, s.period, (s.e0 - 0.2, s.e1p + 0.1))
assert [k for _, k in edges] == ["lower", "upper", "lower"]
for (e, _), w in zip(edges, (s.e0, s.e1, s.e1p)):
    assert abs(e - w) < 1e-4
c = d.chain_potential(0.5, [-0.35, -0.3], (-6.0, 6.0, 241))
assert len(c["v_final"]) == 241 and c["singularities"] == []
"#,
        )
        .unwrap();
    });
}
