//! Bundled example configurations, runnable with `--config`.


pub const FIXTURES: &[(&str, &str)] = &[
    ("ghost-profile", include_str!("../fixtures/ghost-profile.json")),
    ("identity-decompose", include_str!("../fixtures/identity-decompose.json")),
    ("interval-sparsify", include_str!("../fixtures/interval-sparsify.json")),
    ("laplacian-average", include_str!("../fixtures/laplacian-average.json")),
    ("laplacian-parametrix", include_str!("../fixtures/laplacian-parametrix.json")),
    ("laplacian-probe", include_str!("../fixtures/laplacian-probe.json")),
    ("laplacian-spectrum", include_str!("../fixtures/laplacian-spectrum.json")),
    ("parity-shift-limit", include_str!("../fixtures/parity-shift-limit.json")),
    ("plane-partition", include_str!("../fixtures/plane-partition.json")),
    ("quadrant-space", include_str!("../fixtures/quadrant-space.json")),
    ("random-decompose", include_str!("../fixtures/random-decompose.json")),
    ("shift-minus-one-probe", include_str!("../fixtures/shift-minus-one-probe.json")),
    ("tridiag-nu", include_str!("../fixtures/tridiag-nu.json")),
    ("tridiag-nu-local", include_str!("../fixtures/tridiag-nu-local.json")),
    ("tridiag-op", include_str!("../fixtures/tridiag-op.json")),
    ("unilateral-shift-limit", include_str!("../fixtures/unilateral-shift-limit.json")),
];

/// `(name, command, description)` for each fixture.
pub fn list() -> Vec<(&'static str, String, String)> {
    FIXTURES
        .iter()
        .map(|(name, text)| {
            let v: serde_json::Value = serde_json::from_str(text).expect("fixtures are valid JSON");
            let field = |k: &str| v[k].as_str().unwrap_or_default().to_string();
            (*name, field("command"), field("description"))
        })
        .collect()
}
