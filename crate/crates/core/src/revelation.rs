//! Per-point revelation pipeline: initial-state locality, optional filtered
//! locality, the preparation stage, and checks on the final state.

use alloc::vec::Vec;
use core::fmt;

use crate::bellineq::{closed_form_b, filter_x_state, svetlichny_single_coherence, ClosedFormBound, FacetInequality};
use crate::entangle::{cgm_family, cgm_xstate};
use crate::error::{Error, Result};
use crate::measure::BellOutcome;
use crate::optimize::{maximize_with_starts, sup_over_filters, FacetObjective, OptimizerConfig};
use crate::protocol::{apply_filters, smp_prepare, FilterParams, SmpWiring};
use crate::qlin::DensityMatrix;
use crate::states::{extract_x_params, Family, StateFamilyParams};
use crate::tol::VIOLATION_MARGIN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    HiddenS2Revealed,
    HiddenNS2Revealed,
    NoRevelation,
    InitialNotLocal,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::HiddenS2Revealed => "HiddenS2Revealed",
            Verdict::HiddenNS2Revealed => "HiddenNS2Revealed",
            Verdict::NoRevelation => "NoRevelation",
            Verdict::InitialNotLocal => "InitialNotLocal",
        }
    }

    pub fn is_revelation(self) -> bool {
        matches!(self, Verdict::HiddenS2Revealed | Verdict::HiddenNS2Revealed)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Verdict::HiddenS2Revealed,
            Verdict::HiddenNS2Revealed,
            Verdict::NoRevelation,
            Verdict::InitialNotLocal,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or(Error::InvalidConfig("unknown verdict"))
    }
}

/// The verdict as a function of a report row's numeric fields alone.
///
/// `initial_svetlichny` are B₁–B₃; `final_svetlichny` is NaN when the
/// post-selected event is impossible.
pub fn derive_verdict(initial_svetlichny: [f64; 3], initial_local: bool, final_svetlichny: f64, final_facets_violated: bool) -> Verdict {
    let limit = 4.0 + VIOLATION_MARGIN;
    if !initial_local || initial_svetlichny.iter().any(|&b| b > limit) {
        Verdict::InitialNotLocal
    } else if final_svetlichny > limit {
        Verdict::HiddenS2Revealed
    } else if final_facets_violated {
        Verdict::HiddenNS2Revealed
    } else {
        Verdict::NoRevelation
    }
}

/// Max value of one facet on one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetValue {
    pub id: u32,
    pub value: f64,
    pub violated: bool,
}

/// Supremum over local filters of the facet maxima of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredCheck {
    pub local: bool,
    /// Facet attaining the largest `value - bound`.
    pub worst: FacetValue,
    pub filter: FilterParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialReport {
    pub family: Family,
    pub svetlichny: f64,
    pub facets: Vec<FacetValue>,
    pub filtered: Option<FilteredCheck>,
    pub cgm: f64,
}

impl InitialReport {
    pub fn local(&self) -> bool {
        self.svetlichny <= 4.0 + VIOLATION_MARGIN && self.facets.iter().all(|f| !f.violated)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalReport {
    /// Closed-form B₄ (NaN when its denominator vanishes).
    pub b4: f64,
    /// Svetlichny maximum of the prepared state (NaN when never heralded).
    pub svetlichny: f64,
    pub facets: Vec<FacetValue>,
    pub cgm: f64,
    pub probability: f64,
}

impl FinalReport {
    pub fn violated_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.facets.iter().filter(|f| f.violated).map(|f| f.id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevelationReport {
    pub params: StateFamilyParams,
    pub initial: [InitialReport; 3],
    pub final_state: FinalReport,
    /// Number of loaded facets besides the Svetlichny inequality, which is
    /// always checked; fewer than 184 means partial NS₂ coverage.
    pub extra_facets: usize,
    pub verdict: Verdict,
}

impl RevelationReport {
    pub fn initial_local(&self) -> bool {
        self.initial.iter().all(InitialReport::local)
    }

    /// `None` when the filtered check was not requested.
    pub fn filtered_local(&self) -> Option<bool> {
        self.initial
            .iter()
            .map(|r| r.filtered.map(|f| f.local))
            .try_fold(true, |acc, l| l.map(|l| acc && l))
    }

    pub fn partial_coverage(&self) -> bool {
        self.extra_facets < 184
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub optimizer: OptimizerConfig,
    pub filter_check: bool,
    /// ε-grid resolution per axis for the filtered check.
    pub filter_grid: usize,
    pub outcomes: [BellOutcome; 3],
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            filter_check: false,
            filter_grid: 11,
            outcomes: [BellOutcome::PsiMinus; 3],
        }
    }
}

fn facet_max(rho: &DensityMatrix, f: &FacetInequality, cfg: &OptimizerConfig, warm: &[[f64; 12]]) -> Result<(f64, [f64; 12])> {
    if f.is_svetlichny() {
        if let Some(b) = extract_x_params(rho).ok().as_ref().and_then(svetlichny_single_coherence) {
            return Ok((b.value, [0.0; 12]));
        }
    }
    let r = maximize_with_starts(&FacetObjective::new(rho, f)?, warm, cfg)?;
    Ok((r.value, *r.setting.angles()))
}

fn facet_values(rho: &DensityMatrix, facets: &[FacetInequality], cfg: &OptimizerConfig) -> Result<Vec<FacetValue>> {
    facets
        .iter()
        .map(|f| {
            let (value, _) = facet_max(rho, f, cfg, &[])?;
            Ok(FacetValue {
                id: f.id(),
                value,
                violated: f.is_violated_by(value),
            })
        })
        .collect()
}

/// `sup` over local filters `diag(ε,1)^⊗3`, `ε ∈ [0,1]³`, of the maximum of
/// `f` on the filtered `rho`, with a maximizing filter.
///
/// For the Svetlichny facet on a single-coherence X state the inner maximum
/// is the closed form. Otherwise each filter runs a reduced multistart,
/// warm-started from the previous filter's optimum; the best filter and the
/// unfiltered state are then re-optimized with the full configuration.
pub fn filtered_facet_sup(rho: &DensityMatrix, f: &FacetInequality, opts: &ClassifyOptions) -> Result<Option<(FilterParams, f64)>> {
    if f.is_svetlichny() {
        if let Ok(x) = extract_x_params(rho) {
            if svetlichny_single_coherence(&x).is_some() {
                // sup of a max is the max of the sups; searching the branches
                // separately keeps the flat diagonal plateau at 4 from hiding
                // a sine ridge just above it
                let branch = |pick: fn(&ClosedFormBound) -> f64| {
                    sup_over_filters(
                        |e| {
                            filter_x_state(&x, &FilterParams { eps: e })
                                .ok()
                                .and_then(|fx| svetlichny_single_coherence(&fx))
                                .map(|b| pick(&b))
                        },
                        opts.filter_grid,
                        2000,
                    )
                };
                let sup = match (branch(|b| b.sine), branch(|b| b.diagonal)) {
                    (Some(s), Some(d)) => Some(if s.1 >= d.1 { s } else { d }),
                    (s, d) => s.or(d),
                };
                return Ok(sup.map(|(eps, v)| (FilterParams { eps }, v)));
            }
        }
    }

    let inner = OptimizerConfig {
        starts: opts.optimizer.starts.clamp(1, 4),
        ..opts.optimizer
    };
    let mut first_error = None;
    let mut warm: Vec<[f64; 12]> = Vec::new();
    let sup = sup_over_filters(
        |e| {
            let (state, _) = apply_filters(rho, &FilterParams { eps: e }).ok()?;
            match facet_max(&state, f, &inner, &warm) {
                Ok((v, angles)) => {
                    warm.clear();
                    warm.push(angles);
                    Some(v)
                }
                Err(err) => {
                    first_error.get_or_insert(err);
                    None
                }
            }
        },
        opts.filter_grid,
        200,
    );
    if let Some(err) = first_error {
        return Err(err);
    }
    let Some((eps, _)) = sup else { return Ok(None) };
    let mut best: Option<(FilterParams, f64)> = None;
    for filter in [FilterParams { eps }, FilterParams::identity()] {
        let (state, _) = apply_filters(rho, &filter)?;
        let (v, _) = facet_max(&state, f, &opts.optimizer, &warm)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((filter, v));
        }
    }
    Ok(best)
}

/// Whether `family`'s state stays within every facet, and always the
/// Svetlichny bound, under all local filters; reports the facet with the
/// largest `sup − bound`.
pub fn filtered_locality_check(
    family: Family,
    params: &StateFamilyParams,
    facets: &[FacetInequality],
    opts: &ClassifyOptions,
) -> Result<FilteredCheck> {
    let rho = family.build(params)?;
    let svet = crate::bellineq::svetlichny_facet();
    let mut checks: Vec<&FacetInequality> = alloc::vec![&svet];
    checks.extend(facets.iter().filter(|f| !f.is_svetlichny()));

    let mut worst: Option<(f64, FilteredCheck)> = None;
    for f in checks {
        let Some((filter, value)) = filtered_facet_sup(&rho, f, opts)? else {
            continue;
        };
        let excess = value - f.bound();
        if worst.is_none_or(|(w, _)| excess > w) {
            let violated = f.is_violated_by(value);
            worst = Some((
                excess,
                FilteredCheck {
                    local: !violated,
                    worst: FacetValue {
                        id: f.id(),
                        value,
                        violated,
                    },
                    filter,
                },
            ));
        }
    }
    worst.map(|(_, w)| w).ok_or(Error::NullOutcome { probability: 0.0 })
}

/// Runs the full pipeline at one parameter point.
///
/// `facets` are the NS₂ facets to check in addition to the Svetlichny
/// inequality, which is always evaluated (by closed form).
pub fn classify_point(params: &StateFamilyParams, facets: &[FacetInequality], opts: &ClassifyOptions) -> Result<RevelationReport> {
    params.validate()?;
    let extra: Vec<FacetInequality> = facets.iter().filter(|f| !f.is_svetlichny()).cloned().collect();

    let mut states = Vec::with_capacity(3);
    let mut initial = Vec::with_capacity(3);
    for family in Family::INITIAL {
        let rho = family.build(params)?;
        let filtered = if opts.filter_check {
            Some(filtered_locality_check(family, params, &extra, opts)?)
        } else {
            None
        };
        initial.push(InitialReport {
            family,
            svetlichny: closed_form_b(family, params)?.value,
            facets: facet_values(&rho, &extra, &opts.optimizer)?,
            filtered,
            cgm: cgm_family(family, params)?,
        });
        states.push(rho);
    }
    let initial: [InitialReport; 3] = initial.try_into().expect("three initial states");

    let b4 = match closed_form_b(Family::Rho4, params) {
        Ok(b) => b.value,
        Err(Error::DegenerateOutcome { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    let final_state = match smp_prepare(&states[0], &states[1], &states[2], opts.outcomes, &SmpWiring::standard()) {
        Ok((rho4, probability)) => {
            let (svetlichny, _) = facet_max(&rho4, &crate::bellineq::svetlichny_facet(), &opts.optimizer, &[])?;
            let cgm = extract_x_params(&rho4).map_or(f64::NAN, |x| cgm_xstate(&x));
            FinalReport {
                b4,
                svetlichny,
                facets: facet_values(&rho4, &extra, &opts.optimizer)?,
                cgm,
                probability,
            }
        }
        Err(Error::NullOutcome { .. }) => FinalReport {
            b4,
            svetlichny: f64::NAN,
            facets: Vec::new(),
            cgm: f64::NAN,
            probability: 0.0,
        },
        Err(e) => return Err(e),
    };

    let mut report = RevelationReport {
        params: *params,
        initial,
        final_state,
        extra_facets: extra.len(),
        verdict: Verdict::NoRevelation,
    };
    report.verdict = derive_verdict(
        [0, 1, 2].map(|i| report.initial[i].svetlichny),
        report.initial_local(),
        report.final_state.svetlichny,
        report.final_state.violated_ids().next().is_some(),
    );
    Ok(report)
}
