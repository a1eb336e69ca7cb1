//! Reference problems with known Macaulay sizes.

use crate::problem::MOProblem;

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub problem: MOProblem,
    /// Smallest Macaulay degree that admits an eliminant.
    pub degree: usize,
    /// `(p_d, q_d)` at that degree.
    pub size: (usize, usize),
}

/// Three-stock portfolio: negated revenue against risk on a fixed budget.
pub fn portfolio() -> MOProblem {
    MOProblem::from_exprs(
        &["x1", "x2", "x3"],
        &[
            "-(0.1*x1 + 0.2*x2 + 0.15*x3)",
            "1e-4*(5*x1^2 + 10*x2^2 + 7*x3^2 + 2*x1*x2 + 4*x1*x3 + 6*x2*x3)",
        ],
        &["x1 + x2 + x3 - 100"],
    )
    .expect("valid fixture")
}

/// Unconstrained tri-objective problem in two variables.
pub fn example1() -> MOProblem {
    MOProblem::from_exprs(
        &["x1", "x2"],
        &["(x1 - 3)^2 + (x2 - 2)^2", "x1 + x2", "x1 + 2*x2"],
        &[],
    )
    .expect("valid fixture")
}

/// Cubic and quadratic objectives on a circle.
pub fn example2() -> MOProblem {
    MOProblem::from_exprs(
        &["x1", "x2"],
        &["-x1^3 - x2^3", "x1^2 - x2^2"],
        &["x1^2 + (x2 + 1)^2 - 1"],
    )
    .expect("valid fixture")
}

/// Three squared distances on the real line.
pub fn example3() -> MOProblem {
    MOProblem::from_exprs(&["x"], &["x^2", "(x - 1)^2", "(x - 2)^2"], &[]).expect("valid fixture")
}

pub const EXAMPLE1_ELIMINANT: &str = "5*s2^2 - 6*s2*s3 + 2*s3^2 - s1 - 8*s2 + 2*s3 + 13";

pub const EXAMPLE2_ELIMINANT: &str = "s2^6 - 12*s2^5 - 12*s1*s2^4 + 16*s1^4 + 48*s1^3*s2 \
     + 48*s1^2*s2^2 + 32*s1*s2^3 + 48*s2^4 - 32*s1^3 - 48*s1^2*s2";

/// Two generators of the Example 3 front curve.
pub const EXAMPLE3_GENERATORS: [&str; 2] = [
    "s1 - 2*s2 + s3 - 2",
    "s2^2 - 2*s2*s3 + s3^2 - 2*s2 - 2*s3 + 1",
];

pub fn all() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "portfolio",
            problem: portfolio(),
            degree: 4,
            size: (384, 330),
        },
        Fixture {
            name: "example1",
            problem: example1(),
            degree: 2,
            size: (19, 36),
        },
        Fixture {
            name: "example2",
            problem: example2(),
            degree: 8,
            size: (3234, 3003),
        },
        Fixture {
            name: "example3",
            problem: example3(),
            degree: 3,
            size: (49, 84),
        },
    ]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
