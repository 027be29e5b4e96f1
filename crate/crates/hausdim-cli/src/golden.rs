//! Published reference brackets used by the reproduction mode.
//!
//! Each row records a certified bracket previously published for the
//! same algorithm at a stated mesh size (and truncation radius for the
//! infinite planar sets), together with the comparison tolerance the
//! reproduction must meet. Bounded-digit rows carry 15 significant
//! digits; planar rows were published with 5 decimals, so their
//! tolerances are wider.

use crate::config::ComplexSetName;

/// One bounded-digit continued fraction row: digit set, mesh size, and
/// the published certified endpoints.
#[derive(Debug, Clone, Copy)]
pub struct CfRow {
    pub label: &'static str,
    pub digits: &'static [u32],
    pub h: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Per-endpoint tolerance for bounded-digit rows.
pub const CF_TOL: f64 = 1e-9;

pub const CF_ROWS: &[CfRow] = &[
    CfRow {
        label: "E[1,2]",
        digits: &[1, 2],
        h: 1e-4,
        lower: 0.531280505099895,
        upper: 0.531280506539767,
    },
    CfRow {
        label: "E[1,2]",
        digits: &[1, 2],
        h: 5e-5,
        lower: 0.531280505981423,
        upper: 0.531280506343388,
    },
    CfRow {
        label: "E[1,3]",
        digits: &[1, 3],
        h: 1e-4,
        lower: 0.454489076859422,
        upper: 0.454489077843624,
    },
    CfRow {
        label: "E[1,3]",
        digits: &[1, 3],
        h: 5e-5,
        lower: 0.454489077459035,
        upper: 0.454489077707546,
    },
    CfRow {
        label: "E[1,4]",
        digits: &[1, 4],
        h: 1e-4,
        lower: 0.411182724095752,
        upper: 0.411182724934834,
    },
    CfRow {
        label: "E[1,4]",
        digits: &[1, 4],
        h: 5e-5,
        lower: 0.411182724603313,
        upper: 0.411182724815117,
    },
    CfRow {
        label: "E[2,3]",
        digits: &[2, 3],
        h: 1e-4,
        lower: 0.337436780744847,
        upper: 0.337436780851139,
    },
    CfRow {
        label: "E[2,3]",
        digits: &[2, 3],
        h: 5e-5,
        lower: 0.337436780790228,
        upper: 0.337436780817793,
    },
    CfRow {
        label: "E[2,4]",
        digits: &[2, 4],
        h: 1e-4,
        lower: 0.306312767993699,
        upper: 0.306312768092506,
    },
    CfRow {
        label: "E[2,4]",
        digits: &[2, 4],
        h: 5e-5,
        lower: 0.306312768039239,
        upper: 0.306312768061760,
    },
    CfRow {
        label: "E[3,4]",
        digits: &[3, 4],
        h: 1e-4,
        lower: 0.263737482885901,
        upper: 0.263737482913807,
    },
    CfRow {
        label: "E[3,4]",
        digits: &[3, 4],
        h: 5e-5,
        lower: 0.263737482894486,
        upper: 0.263737482901574,
    },
    CfRow {
        label: "E[10,11]",
        digits: &[10, 11],
        h: 2e-4,
        lower: 0.146921235390446,
        upper: 0.146921235393309,
    },
    CfRow {
        label: "E[10,11]",
        digits: &[10, 11],
        h: 5e-5,
        lower: 0.146921235390764,
        upper: 0.146921235390925,
    },
    CfRow {
        label: "E[100,10000]",
        digits: &[100, 10000],
        h: 4e-4,
        lower: 0.052246592638657,
        upper: 0.052246592638662,
    },
    CfRow {
        label: "E[100,10000]",
        digits: &[100, 10000],
        h: 1e-4,
        lower: 0.052246592638659,
        upper: 0.052246592638659,
    },
    CfRow {
        label: "E[2,4,6,8,10]",
        digits: &[2, 4, 6, 8, 10],
        h: 1e-4,
        lower: 0.517357030830725,
        upper: 0.517357030987649,
    },
    CfRow {
        label: "E[2,4,6,8,10]",
        digits: &[2, 4, 6, 8, 10],
        h: 5e-5,
        lower: 0.517357030911231,
        upper: 0.517357030949266,
    },
    CfRow {
        label: "E[1..10]",
        digits: &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        h: 1e-4,
        lower: 0.925737589218857,
        upper: 0.925737591547918,
    },
    CfRow {
        label: "E[1..10]",
        digits: &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        h: 5e-5,
        lower: 0.925737590664670,
        upper: 0.925737591246997,
    },
    CfRow {
        label: "E[odd<=33]",
        digits: &[
            1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23, 25, 27, 29, 31, 33,
        ],
        h: 1e-4,
        lower: 0.770516007582087,
        upper: 0.770516008987138,
    },
    CfRow {
        label: "E[odd<=33]",
        digits: &[
            1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23, 25, 27, 29, 31, 33,
        ],
        h: 5e-5,
        lower: 0.770516008433225,
        upper: 0.770516008784885,
    },
    CfRow {
        label: "E[even<=34]",
        digits: &[
            2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34,
        ],
        h: 1e-4,
        lower: 0.633471970121772,
        upper: 0.633471970288076,
    },
    CfRow {
        label: "E[even<=34]",
        digits: &[
            2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34,
        ],
        h: 5e-5,
        lower: 0.633471970211609,
        upper: 0.633471970252711,
    },
];

/// One perturbed-Cantor row at mesh size 1e-4.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedRow {
    pub lambda: f64,
    pub h: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Per-endpoint tolerance for perturbed rows; the published endpoints
/// carry more float noise than the bounded-digit table.
pub const PERTURBED_TOL: f64 = 1e-7;

pub const PERTURBED_ROWS: &[PerturbedRow] = &[
    PerturbedRow {
        lambda: 0.0,
        h: 1e-4,
        lower: 0.630929753571458,
        upper: 0.630929753571458,
    },
    PerturbedRow {
        lambda: 0.25,
        h: 1e-4,
        lower: 0.691029102085966,
        upper: 0.691029110502743,
    },
    PerturbedRow {
        lambda: 0.5,
        h: 1e-4,
        lower: 0.733474587362570,
        upper: 0.733474622222681,
    },
    PerturbedRow {
        lambda: 0.75,
        h: 1e-4,
        lower: 0.767207161950980,
        upper: 0.767207292955634,
    },
    PerturbedRow {
        lambda: 1.0,
        h: 1e-4,
        lower: 0.796727161816835,
        upper: 0.796727861914653,
    },
];

/// One planar row: digit set, mesh size, truncation radius (ignored by
/// the finite set), published endpoints, and its comparison tolerance.
#[derive(Debug, Clone, Copy)]
pub struct ComplexRow {
    pub set: ComplexSetName,
    pub h: f64,
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    pub tol: f64,
}

/// Tolerance for the finite planar set, published with 5 decimals.
pub const COMPLEX_FINITE_TOL: f64 = 1e-4;
/// Tolerance for the infinite planar sets at desk-scale meshes.
pub const COMPLEX_INFINITE_TOL: f64 = 2e-3;

pub const COMPLEX_ROWS: &[ComplexRow] = &[
    ComplexRow {
        set: ComplexSetName::I1,
        h: 0.02,
        radius: 100.0,
        lower: 1.85459,
        upper: 1.85609,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I1,
        h: 0.01,
        radius: 100.0,
        lower: 1.85507,
        upper: 1.85595,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I1,
        h: 0.005,
        radius: 100.0,
        lower: 1.85518,
        upper: 1.85591,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I1,
        h: 0.02,
        radius: 200.0,
        lower: 1.85503,
        upper: 1.85604,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I1,
        h: 0.01,
        radius: 200.0,
        lower: 1.85550,
        upper: 1.85589,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I1,
        h: 0.02,
        radius: 300.0,
        lower: 1.85513,
        upper: 1.85603,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I2,
        h: 0.02,
        radius: 100.0,
        lower: 1.60240,
        upper: 1.60677,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I2,
        h: 0.01,
        radius: 100.0,
        lower: 1.60270,
        upper: 1.60668,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I2,
        h: 0.005,
        radius: 100.0,
        lower: 1.60277,
        upper: 1.60666,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I2,
        h: 0.02,
        radius: 200.0,
        lower: 1.60444,
        upper: 1.60654,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I2,
        h: 0.01,
        radius: 200.0,
        lower: 1.60474,
        upper: 1.60644,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I2,
        h: 0.02,
        radius: 300.0,
        lower: 1.60504,
        upper: 1.60650,
        tol: COMPLEX_INFINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I3,
        h: 0.02,
        radius: 0.0,
        lower: 1.53705,
        upper: 1.53790,
        tol: COMPLEX_FINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I3,
        h: 0.01,
        radius: 0.0,
        lower: 1.53754,
        upper: 1.53774,
        tol: COMPLEX_FINITE_TOL,
    },
    ComplexRow {
        set: ComplexSetName::I3,
        h: 0.005,
        radius: 0.0,
        lower: 1.53765,
        upper: 1.53770,
        tol: COMPLEX_FINITE_TOL,
    },
];

/// Published tail-constant values for the infinite planar sets at the
/// exponents used in the reference runs.
#[derive(Debug, Clone, Copy)]
pub struct TailRow {
    pub set: ComplexSetName,
    pub s: f64,
    pub radius: f64,
    pub value: f64,
}

pub const TAIL_ROWS: &[TailRow] = &[
    TailRow {
        set: ComplexSetName::I1,
        s: 1.85,
        radius: 100.0,
        value: 0.000796,
    },
    TailRow {
        set: ComplexSetName::I1,
        s: 1.85,
        radius: 200.0,
        value: 0.000236,
    },
    TailRow {
        set: ComplexSetName::I1,
        s: 1.85,
        radius: 300.0,
        value: 0.000117,
    },
    TailRow {
        set: ComplexSetName::I2,
        s: 1.60,
        radius: 100.0,
        value: 0.005582,
    },
    TailRow {
        set: ComplexSetName::I2,
        s: 1.60,
        radius: 200.0,
        value: 0.002347,
    },
    TailRow {
        set: ComplexSetName::I2,
        s: 1.60,
        radius: 300.0,
        value: 0.001427,
    },
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rows_are_well_formed() {
        for row in CF_ROWS {
            assert!(!row.digits.is_empty());
            assert!(row.h > 0.0);
            assert!(row.lower <= row.upper, "{} at h = {}", row.label, row.h);
        }
        for row in PERTURBED_ROWS {
            assert!((0.0..=1.0).contains(&row.lambda));
            assert!(row.lower <= row.upper);
        }
        for row in COMPLEX_ROWS {
            assert!(row.lower < row.upper);
            assert!(row.tol > 0.0);
            if row.set.uses_tail() {
                assert!(row.radius > 2.0);
            }
        }
    }

    #[test]
    fn finer_meshes_give_nested_or_equal_reference_brackets() {
        // Within one family, the bracket at the finer mesh sits inside
        // the coarser one up to print rounding.
        for pair in CF_ROWS.chunks(2) {
            let (coarse, fine) = (pair[0], pair[1]);
            assert_eq!(coarse.label, fine.label);
            assert!(fine.lower >= coarse.lower - 1e-15);
            assert!(fine.upper <= coarse.upper + 1e-15);
        }
    }
}
