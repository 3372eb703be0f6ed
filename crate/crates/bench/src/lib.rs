//! Fixtures shared by the benchmarks.

use bienergy_core::{Chart, FinslerStructure, PointState, RiemannStructure, SmoothMap};

pub fn randers_torus() -> FinslerStructure {
    FinslerStructure::randers(
        Chart::torus(&[1.0, 1.0]),
        &[["1 + 0.2*sin(2*pi*x1)", "0.1"], ["0.1", "1.3"]],
        &["0.2*cos(2*pi*x2)", "0.1*sin(2*pi*x1)"],
    )
    .expect("fixture structure")
}

pub fn sphere() -> RiemannStructure {
    RiemannStructure::sphere(2, 1.5).expect("fixture codomain")
}

pub fn generic_map() -> SmoothMap {
    SmoothMap::new(
        2,
        &[
            "0.6*sin(2*pi*x1 + 0.4) + 0.3*cos(2*pi*x2) + 0.2",
            "0.5*sin(2*pi*(x1+x2)) + 0.2*cos(2*pi*x1) - 0.1",
        ],
    )
    .expect("fixture map")
}

pub fn point() -> PointState {
    PointState::new(vec![0.3, 0.1], vec![0.5, 0.2])
}
