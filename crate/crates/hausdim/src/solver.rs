//! Certified root bracketing for the dimension.
//!
//! The spectral radius of the transfer operator is strictly decreasing
//! and log-convex in the exponent `s`, and equals 1 exactly at the
//! dimension `s*`. A point `s` is a certified lower endpoint when the
//! Collatz-Wielandt lower ratio of `A_s` reaches 1 (then `r(L_s) >= 1`,
//! so `s <= s*`), and a certified upper endpoint when the upper ratio of
//! `B_s` stays at or below 1 (then `s >= s*`). The solver verifies or
//! expands an initial straddle, runs a secant estimate of the root of
//! `log r(B_s)`, and then resolves each certificate boundary with a
//! doubling walk plus bisection, re-certifying the final endpoints.
//!
//! Certificates never depend on power-iteration convergence, so every
//! accepted endpoint is backed by a finite nonnegative-matrix inequality.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::bounds::{
    cf_profile, perturbed_exponent_floor, perturbed_profile, profile_2d, BoundsError,
};
use crate::collocation::{
    assemble_1d, assemble_2d, AssembleOptions, BracketMatrices, CollocationError, TailContribution,
};
use crate::maps::{ContractionMap1D, IfsProblem, MapError};
use crate::mesh::{build_mesh_1d, build_mesh_2d, refine_domain_1d, Mesh1D, Mesh2D, MeshError};
use crate::spectral::{power_iterate, SpectralError};

/// Which endpoint a certificate supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        })
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Collocation(#[from] CollocationError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("mesh too coarse for requested tolerance: the {side} certificate failed at every probe; best uncertified estimate s = {best_estimate}")]
    CannotCertify { side: Side, best_estimate: f64 },
    #[error("solver options are invalid: {detail}")]
    InvalidOptions { detail: &'static str },
    #[error("problem mixes map families the bound profiles do not cover")]
    UnsupportedFamily,
    #[error("certified endpoints crossed: s_lower = {s_lower} > s_upper = {s_upper}")]
    CrossedEndpoints { s_lower: f64, s_upper: f64 },
}

/// One certified endpoint: the exponent and the ratio that proves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub s: f64,
    /// `cw_lower(A_s)` for a lower endpoint (at least 1),
    /// `cw_upper(B_s)` for an upper endpoint (at most 1).
    pub value: f64,
}

/// Work counters accumulated over a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub assemblies: usize,
    pub power_iterations: usize,
    pub certify_calls: usize,
}

/// Certified dimension bracket `[s_lower, s_upper]` with the mesh and
/// tail metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionBracket {
    pub s_lower: f64,
    pub s_upper: f64,
    pub cert_lower: Certificate,
    pub cert_upper: Certificate,
    /// Largest cell width of the mesh used.
    pub h: f64,
    pub truncation_radius: Option<f64>,
    /// Tail constant at `s_upper`, when a tail was in play.
    pub tail_constant: Option<f64>,
    pub stats: SolveStats,
}

impl DimensionBracket {
    pub fn width(&self) -> f64 {
        self.s_upper - self.s_lower
    }
}

/// Mesh construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshParams {
    /// Target spacing; 2D requires the reciprocal of an integer.
    pub h: f64,
    /// Dilation rings around the 2D core cover.
    pub margin_rings: usize,
    /// Domain refinement depth for 1D problems.
    pub refine_depth: usize,
}

impl MeshParams {
    pub fn new(h: f64) -> Self {
        MeshParams {
            h,
            margin_rings: 1,
            refine_depth: 2,
        }
    }
}

/// Root-search tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Width at which endpoint boundary refinement stops.
    pub tol_s: f64,
    /// Relative Collatz-Wielandt gap at which power iteration stops.
    pub tol_eig: f64,
    pub max_power_iter: usize,
    pub safety_factor: f64,
    /// Initial straddle guess; the problem hint is used when absent.
    pub s_init: Option<(f64, f64)>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_s: 1e-12,
            tol_eig: 1e-12,
            max_power_iter: 100_000,
            safety_factor: 1.0 + 1e-12,
            s_init: None,
        }
    }
}

enum MeshKind {
    One(Mesh1D),
    Two(Mesh2D),
}

enum Family {
    ContinuedFraction { gamma: f64 },
    Perturbed { lambda: f64 },
    HalfDisk,
}

/// A problem bound to a concrete mesh, ready for repeated assembly at
/// varying exponents.
pub struct ProblemSetup {
    problem: IfsProblem,
    mesh: MeshKind,
    family: Family,
    assemble_opts: AssembleOptions,
    s_floor: f64,
}

impl ProblemSetup {
    pub fn new(
        problem: &IfsProblem,
        params: &MeshParams,
        safety_factor: f64,
    ) -> Result<Self, SolverError> {
        match problem {
            IfsProblem::Interval { maps, gamma, .. } => {
                let family = classify_1d(maps)?;
                let domain = refine_domain_1d(maps, params.refine_depth)?;
                let mesh = build_mesh_1d(&domain, params.h)?;
                let s_floor = match family {
                    Family::Perturbed { .. } => perturbed_exponent_floor() + 1e-9,
                    _ => 1e-6,
                };
                let family = match family {
                    Family::ContinuedFraction { .. } => Family::ContinuedFraction { gamma: *gamma },
                    other => other,
                };
                Ok(ProblemSetup {
                    problem: problem.clone(),
                    mesh: MeshKind::One(mesh),
                    family,
                    assemble_opts: AssembleOptions { safety_factor },
                    s_floor,
                })
            }
            IfsProblem::HalfDisk { digits, .. } => {
                let mesh = build_mesh_2d(params.h, params.margin_rings)?;
                let s_floor = if digits.is_infinite() {
                    1.0 + 1e-9
                } else {
                    1e-6
                };
                Ok(ProblemSetup {
                    problem: problem.clone(),
                    mesh: MeshKind::Two(mesh),
                    family: Family::HalfDisk,
                    assemble_opts: AssembleOptions { safety_factor },
                    s_floor,
                })
            }
        }
    }

    pub fn problem(&self) -> &IfsProblem {
        &self.problem
    }

    /// Smallest exponent the bound profiles admit for this family.
    pub fn s_floor(&self) -> f64 {
        self.s_floor
    }

    pub fn h_eff(&self) -> f64 {
        match &self.mesh {
            MeshKind::One(mesh) => mesh.max_spacing(),
            MeshKind::Two(mesh) => mesh.h(),
        }
    }

    pub fn mesh_1d(&self) -> Option<&Mesh1D> {
        match &self.mesh {
            MeshKind::One(mesh) => Some(mesh),
            _ => None,
        }
    }

    pub fn mesh_2d(&self) -> Option<&Mesh2D> {
        match &self.mesh {
            MeshKind::Two(mesh) => Some(mesh),
            _ => None,
        }
    }

    /// Assembles the bracket pair at exponent `s` with the family's
    /// bound profile.
    pub fn assemble_at(&self, s: f64) -> Result<BracketMatrices, SolverError> {
        match (&self.mesh, &self.family) {
            (MeshKind::One(mesh), Family::ContinuedFraction { gamma }) => {
                let profile = cf_profile(s, *gamma)?;
                Ok(assemble_1d(
                    &self.problem,
                    mesh,
                    s,
                    &profile,
                    &self.assemble_opts,
                )?)
            }
            (MeshKind::One(mesh), Family::Perturbed { lambda }) => {
                let profile = perturbed_profile(s, *lambda)?;
                Ok(assemble_1d(
                    &self.problem,
                    mesh,
                    s,
                    &profile,
                    &self.assemble_opts,
                )?)
            }
            (MeshKind::Two(mesh), Family::HalfDisk) => {
                let profile = profile_2d(s, 1.0)?;
                Ok(assemble_2d(
                    &self.problem,
                    mesh,
                    s,
                    &profile,
                    &self.assemble_opts,
                )?)
            }
            _ => Err(SolverError::UnsupportedFamily),
        }
    }
}

fn classify_1d(maps: &[ContractionMap1D]) -> Result<Family, SolverError> {
    let mut lambda = None;
    let mut moebius = false;
    for map in maps {
        match map {
            ContractionMap1D::MoebiusDigit { .. } => moebius = true,
            ContractionMap1D::PerturbedCantor { lambda: l, .. } => match lambda {
                None => lambda = Some(*l),
                Some(prev) if prev == *l => {}
                Some(_) => return Err(SolverError::UnsupportedFamily),
            },
        }
    }
    match (moebius, lambda) {
        (true, None) => Ok(Family::ContinuedFraction { gamma: 1.0 }),
        (false, Some(lambda)) => Ok(Family::Perturbed { lambda }),
        _ => Err(SolverError::UnsupportedFamily),
    }
}

/// Outcome of one certification attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOutcome {
    pub holds: bool,
    /// The decisive ratio: `cw_lower(A_s)` or `cw_upper(B_s)`.
    pub value: f64,
    /// Midpoint estimate of the spectral radius of the tested matrix.
    pub lambda_est: f64,
    pub iterations: usize,
}

/// Tests one endpoint certificate at exponent `s`.
pub fn certify(
    setup: &ProblemSetup,
    s: f64,
    side: Side,
    opts: &SolveOptions,
) -> Result<CertifyOutcome, SolverError> {
    let pair = setup.assemble_at(s)?;
    certify_pair(&pair, side, opts)
}

fn certify_pair(
    pair: &BracketMatrices,
    side: Side,
    opts: &SolveOptions,
) -> Result<CertifyOutcome, SolverError> {
    let matrix = match side {
        Side::Lower => &pair.a,
        Side::Upper => &pair.b,
    };
    let spec = power_iterate(matrix, opts.tol_eig, opts.max_power_iter, None)?;
    let (holds, value) = match side {
        Side::Lower => (spec.cw_lower >= 1.0, spec.cw_lower),
        Side::Upper => (spec.cw_upper <= 1.0, spec.cw_upper),
    };
    Ok(CertifyOutcome {
        holds,
        value,
        lambda_est: spec.lambda_est,
        iterations: spec.iterations,
    })
}

struct Engine<'a> {
    setup: &'a ProblemSetup,
    opts: &'a SolveOptions,
    cache: [HashMap<u64, CertifyOutcome>; 2],
    // Radius estimates of B_s keyed by the bits of s; positive exponents
    // order the same way as their bit patterns.
    upper_radius_by_s: BTreeMap<u64, f64>,
    stats: SolveStats,
}

impl<'a> Engine<'a> {
    fn new(setup: &'a ProblemSetup, opts: &'a SolveOptions) -> Self {
        Engine {
            setup,
            opts,
            cache: [HashMap::new(), HashMap::new()],
            upper_radius_by_s: BTreeMap::new(),
            stats: SolveStats::default(),
        }
    }

    fn eval(&mut self, s: f64, side: Side) -> Result<CertifyOutcome, SolverError> {
        let slot = match side {
            Side::Lower => 0,
            Side::Upper => 1,
        };
        if let Some(hit) = self.cache[slot].get(&s.to_bits()) {
            return Ok(*hit);
        }
        let pair = self.setup.assemble_at(s)?;
        self.stats.assemblies += 1;
        let outcome = certify_pair(&pair, side, self.opts)?;
        self.stats.power_iterations += outcome.iterations;
        self.stats.certify_calls += 1;
        self.cache[slot].insert(s.to_bits(), outcome);
        if side == Side::Upper {
            let key = s.to_bits();
            if let Some((_, before)) = self.upper_radius_by_s.range(..key).next_back() {
                debug_assert!(
                    *before >= outcome.lambda_est,
                    "radius estimate must not increase with s"
                );
            }
            if let Some((_, after)) = self.upper_radius_by_s.range(key..).next() {
                debug_assert!(
                    *after <= outcome.lambda_est,
                    "radius estimate must not increase with s"
                );
            }
            self.upper_radius_by_s.insert(key, outcome.lambda_est);
        }
        Ok(outcome)
    }

    fn log_radius(&mut self, s: f64) -> Result<f64, SolverError> {
        Ok(self.eval(s, Side::Upper)?.lambda_est.ln())
    }

    /// Secant estimate of the root of `log r(B_s)` inside `[lo, hi]`,
    /// with bisection fallback whenever the secant step leaves the
    /// current sign-change bracket.
    fn secant_estimate(&mut self, lo0: f64, hi0: f64) -> Result<f64, SolverError> {
        let mut lo = lo0;
        let mut hi = hi0;
        let f_lo = self.log_radius(lo)?;
        if f_lo <= 0.0 {
            return Ok(lo);
        }
        let f_hi = self.log_radius(hi)?;
        if f_hi >= 0.0 {
            return Ok(hi);
        }
        let mut prev = (lo, f_lo);
        let mut last = (hi, f_hi);
        let mut best = 0.5 * (lo + hi);
        for _ in 0..80 {
            let denom = last.1 - prev.1;
            let mut next = last.0 - last.1 * (last.0 - prev.0) / denom;
            if !next.is_finite() || next <= lo || next >= hi {
                next = 0.5 * (lo + hi);
            }
            let f_next = self.log_radius(next)?;
            best = next;
            if f_next > 0.0 {
                lo = next;
            } else {
                hi = next;
            }
            prev = last;
            last = (next, f_next);
            if f_next == 0.0 || hi - lo <= 0.25 * self.opts.tol_s {
                break;
            }
        }
        Ok(best.clamp(lo, hi))
    }

    /// Resolves the certificate boundary for `side` starting from the
    /// root estimate: a doubling walk brackets the boundary between a
    /// failing and a certified probe, bisection narrows it to `tol_s`,
    /// and the certified probe nearest the boundary is returned.
    fn refine_boundary(
        &mut self,
        side: Side,
        start: f64,
        fallback_good: f64,
    ) -> Result<(f64, CertifyOutcome), SolverError> {
        let dir: f64 = match side {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        };
        let floor = self.setup.s_floor();
        let clamp = |s: f64| s.max(floor);
        let start = clamp(start);
        let start_out = self.eval(start, side)?;
        let mut good;
        let mut good_out;
        let mut bad = None;
        if start_out.holds {
            good = start;
            good_out = start_out;
            let mut step = self.opts.tol_s;
            for _ in 0..40 {
                let probe = clamp(good - dir * step);
                if probe == good {
                    break;
                }
                let out = self.eval(probe, side)?;
                if out.holds {
                    good = probe;
                    good_out = out;
                    step *= 2.0;
                } else {
                    bad = Some(probe);
                    break;
                }
            }
        } else {
            let mut worst = start;
            let mut step = self.opts.tol_s;
            let mut found = None;
            for _ in 0..40 {
                let probe = clamp(worst + dir * step);
                if probe == worst {
                    break;
                }
                let out = self.eval(probe, side)?;
                if out.holds {
                    found = Some((probe, out));
                    break;
                }
                worst = probe;
                step *= 2.0;
            }
            match found {
                Some((g, o)) => {
                    good = g;
                    good_out = o;
                }
                None => {
                    good = clamp(fallback_good);
                    good_out = self.eval(good, side)?;
                    if !good_out.holds {
                        return Err(SolverError::CannotCertify {
                            side,
                            best_estimate: start,
                        });
                    }
                }
            }
            bad = Some(worst);
        }
        if let Some(mut bad) = bad {
            for _ in 0..200 {
                if (good - bad).abs() <= self.opts.tol_s {
                    break;
                }
                let mid = 0.5 * (good + bad);
                if mid == good || mid == bad {
                    break;
                }
                let out = self.eval(mid, side)?;
                if out.holds {
                    good = mid;
                    good_out = out;
                } else {
                    bad = mid;
                }
            }
        }
        // One outward nudge keeps honest slack around the certificate
        // boundary; without it a family whose pair matrices coincide can
        // collapse the bracket onto a single rounding-sensitive point.
        let nudged = clamp(good + dir * self.opts.tol_s);
        if nudged != good {
            let out = self.eval(nudged, side)?;
            if out.holds {
                return Ok((nudged, out));
            }
        }
        Ok((good, good_out))
    }
}

/// Finds a certified dimension bracket for `problem` on a fresh mesh.
pub fn find_bracket(
    problem: &IfsProblem,
    params: &MeshParams,
    opts: &SolveOptions,
) -> Result<DimensionBracket, SolverError> {
    let setup = ProblemSetup::new(problem, params, opts.safety_factor)?;
    find_bracket_with(&setup, opts)
}

/// Finds a certified dimension bracket on an existing setup.
pub fn find_bracket_with(
    setup: &ProblemSetup,
    opts: &SolveOptions,
) -> Result<DimensionBracket, SolverError> {
    if !(opts.tol_s > 0.0) {
        return Err(SolverError::InvalidOptions {
            detail: "tol_s must be positive",
        });
    }
    if !(opts.tol_eig > 0.0) {
        return Err(SolverError::InvalidOptions {
            detail: "tol_eig must be positive",
        });
    }
    if !(opts.safety_factor >= 1.0) {
        return Err(SolverError::InvalidOptions {
            detail: "safety_factor must be at least 1",
        });
    }
    let floor = setup.s_floor();
    let hint = opts
        .s_init
        .unwrap_or_else(|| setup.problem().s_domain_hint());
    let mut s0 = hint.0.min(hint.1).max(floor);
    let mut s1 = hint.0.max(hint.1).max(s0 + opts.tol_s);

    let mut engine = Engine::new(setup, opts);

    // Verify the straddle, expanding geometrically while a side fails.
    let mut width = (s1 - s0).max(opts.tol_s);
    loop {
        if engine.eval(s0, Side::Lower)?.holds {
            break;
        }
        if s0 <= floor {
            let best_estimate = engine.secant_estimate(floor, s1)?;
            return Err(SolverError::CannotCertify {
                side: Side::Lower,
                best_estimate,
            });
        }
        s0 = (s0 - width).max(floor);
        width *= 2.0;
    }
    width = (s1 - s0).max(opts.tol_s);
    let mut expansions = 0;
    loop {
        if engine.eval(s1, Side::Upper)?.holds {
            break;
        }
        expansions += 1;
        if expansions > 60 {
            let best_estimate = engine.secant_estimate(s0, s1)?;
            return Err(SolverError::CannotCertify {
                side: Side::Upper,
                best_estimate,
            });
        }
        s1 += width;
        width *= 2.0;
    }

    let estimate = engine.secant_estimate(s0, s1)?;
    let (s_upper, _) = engine.refine_boundary(Side::Upper, estimate, s1)?;
    let (s_lower, _) = engine.refine_boundary(Side::Lower, estimate.min(s_upper), s0)?;
    if s_lower > s_upper {
        return Err(SolverError::CrossedEndpoints { s_lower, s_upper });
    }

    // Re-certify both endpoints from scratch; the certificates recorded
    // in the bracket are these fresh runs, not cached probes.
    let pair_lower = setup.assemble_at(s_lower)?;
    let lower_out = certify_pair(&pair_lower, Side::Lower, opts)?;
    let pair_upper = setup.assemble_at(s_upper)?;
    let upper_out = certify_pair(&pair_upper, Side::Upper, opts)?;
    engine.stats.assemblies += 2;
    engine.stats.certify_calls += 2;
    engine.stats.power_iterations += lower_out.iterations + upper_out.iterations;
    if !lower_out.holds {
        return Err(SolverError::CannotCertify {
            side: Side::Lower,
            best_estimate: s_lower,
        });
    }
    if !upper_out.holds {
        return Err(SolverError::CannotCertify {
            side: Side::Upper,
            best_estimate: s_upper,
        });
    }

    let tail = pair_upper.tail_used;
    Ok(DimensionBracket {
        s_lower,
        s_upper,
        cert_lower: Certificate {
            s: s_lower,
            value: lower_out.value,
        },
        cert_upper: Certificate {
            s: s_upper,
            value: upper_out.value,
        },
        h: setup.h_eff(),
        truncation_radius: tail
            .as_ref()
            .map(|t: &TailContribution| t.truncation_radius),
        tail_constant: tail.as_ref().map(|t| t.constant),
        stats: engine.stats,
    })
}
