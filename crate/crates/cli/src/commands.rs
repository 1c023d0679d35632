use serde::Serialize;
use toa_core::classical::ltoa_series;
use toa_core::expectation::{
    free_toa_closed_form, free_toa_pv, series_expectation, ExpectationMethod, ExpectationRecord,
    GaussianState,
};
use toa_core::format::float17;
use toa_core::kernel::{
    inverse_weyl_roundtrip, kernel_csv, tke_residual_series, weyl_map_series, GradeTag, KernelGrid,
    KernelQuadrature, KernelRoute,
};
use toa_core::moyal::{
    build_moyal_toa, check_time_reversal, corrections_empty, moyal_bracket, satisfies_exponent_law,
};
use toa_core::quartic::{quartic_csv, quartic_report, QuarticParams, RowStatus};
use toa_core::series::{rat, PhaseSeries, QPoly};

use crate::config::{Format, Prepared, RunConfig, DEFAULT_QUARTIC_K_MAX};
use crate::error::CliError;

/// What a command produced: the artifact text and whether every check or row passed.
pub struct Outcome {
    pub contents: String,
    pub warnings: Vec<String>,
    pub failed: bool,
}

#[derive(Serialize)]
struct SeriesEntry {
    n: usize,
    m: i32,
    coeffs: Vec<String>,
}

#[derive(Serialize)]
struct SeriesMetadata {
    potential: Vec<String>,
    mu: String,
    n_max: usize,
    k_max: u32,
}

#[derive(Serialize)]
struct SeriesFile {
    metadata: SeriesMetadata,
    entries: Vec<SeriesEntry>,
}

fn metadata(p: &Prepared) -> SeriesMetadata {
    SeriesMetadata {
        potential: if p.potential.poly().is_zero() {
            vec!["0".to_string()]
        } else {
            p.potential
                .poly()
                .coeffs()
                .iter()
                .map(|c| c.to_string())
                .collect()
        },
        mu: p.mu.to_string(),
        n_max: p.cutoffs.n_max,
        k_max: p.cutoffs.k_max,
    }
}

pub fn series(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.prepare(toa_core::series::Cutoffs::default().k_max)?;
    let s = build_moyal_toa(&p.potential, &p.mu, p.cutoffs)?;
    let file = SeriesFile {
        metadata: metadata(&p),
        entries: s
            .iter()
            .map(|(n, m, c)| SeriesEntry {
                n,
                m,
                coeffs: c.coeffs().iter().map(|x| x.to_string()).collect(),
            })
            .collect(),
    };
    Ok(Outcome {
        contents: crate::output::to_json(&file),
        warnings: Vec::new(),
        failed: false,
    })
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    metadata: SeriesMetadata,
    corrections_empty: bool,
    checks: Vec<Check>,
    all_pass: bool,
}

/// Perturbs the free-term entry by q²/1000 so the bracket no longer closes.
fn corrupt(s: &PhaseSeries) -> Result<PhaseSeries, CliError> {
    let mut terms = s.terms().clone();
    terms.add_term(0, -1, QPoly::monomial(rat(1, 1000), 2));
    Ok(PhaseSeries::from_terms(terms, s.mu().clone(), s.cutoffs())?)
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.prepare(toa_core::series::Cutoffs::default().k_max)?;
    let mut s = build_moyal_toa(&p.potential, &p.mu, p.cutoffs)?;
    if cfg.verify.as_ref().is_some_and(|v| v.inject_corruption) {
        s = corrupt(&s)?;
    }
    let mut checks = Vec::new();

    let bracket = moyal_bracket(&p.potential, &s);
    let interior = bracket.interior_residuals().count();
    checks.push(Check {
        name: "moyal_bracket",
        pass: bracket.passes(),
        detail: format!(
            "constant term {}, {} interior residual entries, {} boundary orders",
            bracket.constant_term,
            interior,
            bracket.boundary_orders.len()
        ),
    });

    let odd = check_time_reversal(s.terms());
    checks.push(Check {
        name: "time_reversal",
        pass: odd,
        detail: "all p-exponents odd".into(),
    });

    let law = satisfies_exponent_law(&s, &p.potential);
    checks.push(Check {
        name: "exponent_law",
        pass: law,
        detail: format!(
            "minimum |m| per grade, bracket orders r ≤ {}",
            p.potential.max_bracket_order()
        ),
    });

    let kernel = weyl_map_series(&s)?;
    let tke = tke_residual_series(&kernel, &p.potential);
    checks.push(Check {
        name: "tke_residual",
        pass: tke.is_exact_zero(),
        detail: format!(
            "max interior |coefficient| {}",
            float17(tke.max_abs_residual())
        ),
    });

    let back = inverse_weyl_roundtrip(&kernel)?;
    checks.push(Check {
        name: "weyl_roundtrip",
        pass: back == s,
        detail: format!("{} entries", s.len()),
    });

    let linear = p.potential.is_linear_system();
    if linear {
        let ltoa = ltoa_series(&p.potential, &p.mu, p.cutoffs.k_max)?;
        let same = ltoa.terms() == s.terms();
        checks.push(Check {
            name: "linear_collapse",
            pass: same && corrections_empty(&s),
            detail: "quantum corrections empty; series equals the local series".into(),
        });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let warnings = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("check {} failed: {}", c.name, c.detail))
        .collect();
    let report = VerifyReport {
        metadata: metadata(&p),
        corrections_empty: corrections_empty(&s),
        checks,
        all_pass,
    };
    Ok(Outcome {
        contents: crate::output::to_json(&report),
        warnings,
        failed: !all_pass,
    })
}

#[derive(Serialize)]
struct ExpectationRow {
    state_index: usize,
    #[serde(flatten)]
    record: ExpectationRecord,
    excluded_mass: f64,
    rel_dev: f64,
    status: &'static str,
}

pub fn expectation(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.prepare(toa_core::series::Cutoffs::default().k_max)?;
    let ec = cfg
        .expectation
        .as_ref()
        .ok_or_else(|| CliError::config("expectation", "missing block"))?;
    let free = p.potential.poly().is_zero();
    let series = if free {
        None
    } else {
        Some(build_moyal_toa(&p.potential, &p.mu, p.cutoffs)?)
    };

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (i, spec) in ec.states.iter().enumerate() {
        let state = GaussianState::new(spec.q0, spec.k0, spec.sigma, p.hbar, p.mu_f64)
            .map_err(|e| CliError::config(&format!("expectation.states[{i}]"), e.to_string()))?;
        if let Some(series) = &series {
            match series_expectation(series, &p.potential, &state) {
                Ok(r) => rows.push(ExpectationRow {
                    state_index: i,
                    record: ExpectationRecord::new(state, &r),
                    excluded_mass: r.excluded_mass,
                    rel_dev: f64::NAN,
                    status: "ok",
                }),
                Err(e) => {
                    warnings.push(format!("state {i}: {e}"));
                    rows.push(failed_row(i, state, ExpectationMethod::PvQuadrature));
                }
            }
            continue;
        }
        let closed = free_toa_closed_form(&state)?;
        let pv = free_toa_pv(&state);
        let (pv_row, dev, status) = match pv {
            Ok(r) => {
                let dev = if closed.value == 0.0 {
                    (r.value - closed.value).abs()
                } else {
                    ((r.value - closed.value) / closed.value).abs()
                };
                let status = if dev <= ec.tolerance {
                    "ok"
                } else {
                    "deviation"
                };
                if status != "ok" {
                    warnings.push(format!("state {i}: routes differ by {dev:e}"));
                }
                (
                    ExpectationRow {
                        state_index: i,
                        record: ExpectationRecord::new(state, &r),
                        excluded_mass: r.excluded_mass,
                        rel_dev: dev,
                        status,
                    },
                    dev,
                    status,
                )
            }
            Err(e) => {
                warnings.push(format!("state {i}: {e}"));
                (
                    failed_row(i, state, ExpectationMethod::PvQuadrature),
                    f64::NAN,
                    "non-convergent",
                )
            }
        };
        rows.push(ExpectationRow {
            state_index: i,
            record: ExpectationRecord {
                state,
                method: ExpectationMethod::ClosedForm,
                value: closed.value,
                est_error: 0.0,
            },
            excluded_mass: 0.0,
            rel_dev: dev,
            status,
        });
        rows.push(pv_row);
    }

    let failed = rows.iter().any(|r| r.status != "ok");
    let contents = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => crate::output::to_json(&rows),
        Format::Csv => {
            let mut out = String::from("state_index,q0,k0,sigma,hbar,mu,method,value,est_error,excluded_mass,rel_dev,status\n");
            for r in &rows {
                let s = &r.record.state;
                let method = match r.record.method {
                    ExpectationMethod::ClosedForm => "closed-form",
                    ExpectationMethod::PvQuadrature => "pv-quadrature",
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.state_index,
                    float17(s.q0),
                    float17(s.k0),
                    float17(s.sigma),
                    float17(s.hbar),
                    float17(s.mu),
                    method,
                    float17(r.record.value),
                    float17(r.record.est_error),
                    float17(r.excluded_mass),
                    float17(r.rel_dev),
                    r.status
                ));
            }
            out
        }
    };
    Ok(Outcome {
        contents,
        warnings,
        failed,
    })
}

fn failed_row(i: usize, state: GaussianState, method: ExpectationMethod) -> ExpectationRow {
    ExpectationRow {
        state_index: i,
        record: ExpectationRecord {
            state,
            method,
            value: f64::NAN,
            est_error: f64::NAN,
        },
        excluded_mass: f64::NAN,
        rel_dev: f64::NAN,
        status: "non-convergent",
    }
}

pub fn quartic(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.prepare(DEFAULT_QUARTIC_K_MAX)?;
    let coeffs = p.potential.poly().coeffs();
    if p.potential.degree() != 4 || coeffs[..4].iter().any(|c| !num_traits::Zero::is_zero(c)) {
        return Err(CliError::config(
            "potential",
            "quartic command needs V(q) = λq⁴",
        ));
    }
    let lambda = num_traits::ToPrimitive::to_f64(&coeffs[4]).unwrap_or(f64::NAN);
    let qc = cfg.quartic.clone().unwrap_or_default();
    let params = QuarticParams::new(lambda, p.mu_f64, p.hbar)?;
    let series = build_moyal_toa(&p.potential, &p.mu, p.cutoffs)?;
    let points = qc.all_points();
    if points.iter().any(|&(_, pp)| pp == 0.0) {
        return Err(CliError::config(
            "quartic",
            "p = 0 is a momentum singularity",
        ));
    }
    let rows = quartic_report(&params, &series, &points)?;
    let warnings: Vec<String> = rows
        .iter()
        .filter(|r| r.status != RowStatus::Ok)
        .map(|r| format!("({}, {}) {}: {}", r.q, r.p, r.quantity, r.status))
        .collect();
    let contents = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => crate::output::to_json(&rows),
        Format::Csv => quartic_csv(&rows),
    };
    Ok(Outcome {
        contents,
        failed: !warnings.is_empty(),
        warnings,
    })
}

#[derive(Serialize)]
struct GridJson {
    grade: String,
    route: String,
    q_nodes: Vec<f64>,
    qprime_nodes: Vec<f64>,
    values: Vec<Vec<f64>>,
}

pub fn kernel(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let kc = cfg
        .kernel
        .as_ref()
        .ok_or_else(|| CliError::config("kernel", "missing block"))?;
    let p = cfg.prepare(toa_core::series::Cutoffs::default().k_max)?;
    let n_max = kc.n_max.or(cfg.n_max).unwrap_or(2);
    let qs = &kc.q_nodes;
    let qps = kc.qprime_nodes.as_ref().unwrap_or(&kc.q_nodes);
    if qs.is_empty() || qps.is_empty() {
        return Err(CliError::config(
            "kernel.q_nodes",
            "node lists must be nonempty",
        ));
    }
    let mut grids: Vec<KernelGrid> = Vec::new();
    for route in &kc.routes {
        match route {
            KernelRoute::Series => {
                let cut = toa_core::series::Cutoffs::new(n_max, p.cutoffs.k_max);
                let s = build_moyal_toa(&p.potential, &p.mu, cut)?;
                let k = weyl_map_series(&s)?;
                for n in 0..=n_max {
                    grids.push(KernelGrid::from_series(
                        &k,
                        GradeTag::Single(n),
                        p.hbar,
                        qs,
                        qps,
                    ));
                }
            }
            KernelRoute::Quadrature => {
                let mut kq = KernelQuadrature::new(&p.potential, p.mu_f64, p.hbar)?;
                if let Some(n) = kc.nodes {
                    kq = kq.with_nodes(n);
                }
                if let Some(d) = kc.degree {
                    kq = kq.with_degree(d);
                }
                grids.extend(kq.grids(n_max, qs, qps)?);
            }
        }
    }
    let contents = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => kernel_csv(&grids),
        Format::Json => crate::output::to_json(
            &grids
                .iter()
                .map(|g| GridJson {
                    grade: g.grade.to_string(),
                    route: g.route.to_string(),
                    q_nodes: g.q_nodes.clone(),
                    qprime_nodes: g.qprime_nodes.clone(),
                    values: g.values.clone(),
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Outcome {
        contents,
        warnings: Vec::new(),
        failed: false,
    })
}
