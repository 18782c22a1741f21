//! Random members of the operator catalog for property tests.

use proptest::prelude::*;
use sppa_core::{ConvexFn, ConvexSet, Matrix, OperatorSpec, Vector};

pub fn vector(d: usize, scale: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-scale..scale, d).prop_map(|c| Vector::new(c).unwrap())
}

fn square(d: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0..1.0f64, d * d).prop_map(move |c| {
        let rows: Vec<&[f64]> = c.chunks(d).collect();
        Matrix::from_rows(&rows).unwrap()
    })
}

/// `B Bᵀ`
pub fn psd(d: usize) -> impl Strategy<Value = Matrix> {
    square(d).prop_map(|b| {
        let bt = b.transpose();
        let mut out = Matrix::zeros(b.rows(), b.rows());
        for i in 0..b.rows() {
            for j in 0..b.rows() {
                out.set(i, j, (0..b.rows()).map(|k| b.get(i, k) * bt.get(k, j)).sum());
            }
        }
        out.sym_part()
    })
}

/// PSD plus skew: monotone but not symmetric.
pub fn monotone(d: usize) -> impl Strategy<Value = Matrix> {
    (psd(d), square(d)).prop_map(|(p, c)| p.add(&c.add(&c.transpose().scaled(-1.0))))
}

fn diagonal_psd(d: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(0.0..3.0f64, d).prop_map(|c| Matrix::from_diag(&c))
}

fn unit_normal(d: usize) -> impl Strategy<Value = Vector> {
    vector(d, 1.0).prop_filter("normal away from zero", |v| v.norm() > 0.1)
}

pub fn simple_set(d: usize) -> impl Strategy<Value = ConvexSet> {
    prop_oneof![
        (vector(d, 2.0), prop::collection::vec(0.0..2.0f64, d)).prop_map(|(c, h)| {
            let h = Vector::new(h).unwrap();
            ConvexSet::boxed(&c - &h, &c + &h).unwrap()
        }),
        (unit_normal(d), -2.0..2.0f64).prop_map(|(a, b)| ConvexSet::halfspace(a, b).unwrap()),
        (unit_normal(d), -2.0..2.0f64).prop_map(|(a, b)| ConvexSet::hyperplane(a, b).unwrap()),
        (vector(d, 2.0), 0.1..3.0f64).prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
    ]
}

/// Simple sets plus a box meeting a ball around the same center.
pub fn set(d: usize) -> impl Strategy<Value = ConvexSet> {
    prop_oneof![
        4 => simple_set(d),
        1 => (vector(d, 2.0), 0.2..2.0f64, 0.2..2.0f64).prop_map(move |(c, h, r)| {
            let h = Vector::new(vec![h; c.dim()]).unwrap();
            ConvexSet::intersection(vec![
                ConvexSet::boxed(&c - &h, &c + &h).unwrap(),
                ConvexSet::ball(c.axpy(0.5, &h), r).unwrap(),
            ])
            .unwrap()
        }),
    ]
}

/// Indicator of a set plus a quadratic it admits a closed-form prox with.
pub fn indicator_composite(d: usize) -> impl Strategy<Value = ConvexFn> {
    prop_oneof![
        (diagonal_psd(d), vector(d, 2.0), vector(d, 2.0), prop::collection::vec(0.0..2.0f64, d)).prop_map(
            |(q, b, c, h)| {
                let h = Vector::new(h).unwrap();
                let set = ConvexSet::boxed(&c - &h, &c + &h).unwrap();
                ConvexFn::sum(vec![ConvexFn::quadratic(q, b).unwrap(), ConvexFn::indicator(set).unwrap()]).unwrap()
            }
        ),
        (0.0..3.0f64, vector(d, 2.0), simple_set(d)).prop_map(move |(k, b, set)| {
            ConvexFn::sum(vec![
                ConvexFn::quadratic(Matrix::scalar(b.dim(), k), b).unwrap(),
                ConvexFn::indicator(set).unwrap(),
            ])
            .unwrap()
        }),
    ]
}

pub fn function(d: usize) -> impl Strategy<Value = ConvexFn> {
    let leaf = prop_oneof![
        (psd(d), vector(d, 2.0)).prop_map(|(q, b)| ConvexFn::quadratic(q, b).unwrap()),
        prop::collection::vec(0.0..2.0f64, d).prop_map(|w| ConvexFn::weighted_l1(Vector::new(w).unwrap()).unwrap()),
        vector(d, 2.0).prop_map(ConvexFn::linear),
        set(d).prop_map(|s| ConvexFn::indicator(s).unwrap()),
        (diagonal_psd(d), vector(d, 2.0), prop::collection::vec(0.0..2.0f64, d)).prop_map(|(q, b, w)| {
            ConvexFn::sum(vec![
                ConvexFn::quadratic(q, b).unwrap(),
                ConvexFn::weighted_l1(Vector::new(w).unwrap()).unwrap(),
            ])
            .unwrap()
        }),
        indicator_composite(d),
    ];
    (leaf, prop::option::weighted(0.3, vector(d, 2.0))).prop_map(|(f, shift)| match shift {
        Some(s) => ConvexFn::translate(s, f).unwrap(),
        None => f,
    })
}

fn saddle(d: usize) -> impl Strategy<Value = OperatorSpec> {
    let dx = d / 2;
    let dy = d - dx;
    (psd(dx), psd(dy), prop::collection::vec(-1.0..1.0f64, dx * dy), vector(dx, 2.0), vector(dy, 2.0)).prop_map(
        move |(p, r, k, c, dd)| {
            let rows: Vec<&[f64]> = k.chunks(dy).collect();
            OperatorSpec::saddle(p, r, Matrix::from_rows(&rows).unwrap(), c, dd).unwrap()
        },
    )
}

fn base_operator(d: usize) -> BoxedStrategy<OperatorSpec> {
    let mut options = vec![
        (monotone(d), vector(d, 2.0)).prop_map(|(m, b)| OperatorSpec::affine(m, b).unwrap()).boxed(),
        function(d).prop_map(|f| OperatorSpec::subdifferential(f).unwrap()).boxed(),
        set(d).prop_map(|s| OperatorSpec::normal_cone(s).unwrap()).boxed(),
    ];
    if d >= 2 {
        options.push(saddle(d).boxed());
    }
    if d == 2 {
        options.push(Just(OperatorSpec::rotation_2d()).boxed());
    }
    prop::strategy::Union::new(options).boxed()
}

/// Any catalog operator in dimension `d`, occasionally scaled.
pub fn operator(d: usize) -> impl Strategy<Value = OperatorSpec> {
    (base_operator(d), prop::option::weighted(0.2, 0.1..5.0f64)).prop_map(|(op, alpha)| match alpha {
        Some(a) => OperatorSpec::scaled(a, op).unwrap(),
        None => op,
    })
}

/// Log-uniform step size in `[1e-3, 1e3]`.
pub fn step() -> impl Strategy<Value = f64> {
    (-3.0..3.0f64).prop_map(|e| 10f64.powf(e))
}

/// `(op, x, y, λ)` with `x, y` anywhere in `[-5, 5]^d`.
pub fn operator_case() -> impl Strategy<Value = (OperatorSpec, Vector, Vector, f64)> {
    (1usize..=4).prop_flat_map(|d| (operator(d), vector(d, 5.0), vector(d, 5.0), step()))
}
