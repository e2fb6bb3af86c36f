//! Verification suites behind the `cathaul` command line.
//!
//! Each suite loads one fixture, evaluates the relevant residuals at a base
//! grid size and at coarser refinement levels, and assembles a [`Report`]
//! whose entries are ordered deterministically.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use cathaul::algebra::finite::FiniteCrossedModule;
use cathaul::algebra::{
    validate_categorical_group, validate_crossed_module, ValidationMode, ValidationReport,
};
use cathaul::bundle::{
    horizontal_lift, multiply_path, shifted_transport, step_residual, tangent_residual, Integrator,
};
use cathaul::catbundle::{
    check_cc, check_sdec_functor, conn_custom_dec, conn_lift_dec, conn_pushforward_dec,
    conn_pushforward_general, conn_standard, pp_distance, sdec_pair, CCReport, CatConnection,
    CategoricalBundle, DecoratedBundle, FiberChoice, PairBundle,
};
use cathaul::fixtures::{lie_crossed_module, FixtureFile};
use cathaul::gauge::{
    gauge_check_axioms, gengauge_candidate, gengauge_transport_check, induced_pushforward_morphism,
    AxiomClass, CatGaugeTransform, DecorationForm, GaugeMap, ThetaSpec, TransformLaw,
};
use cathaul::paths::PathPoint;
use cathaul::report::{CheckEntry, Report, SlopeEntry};
use cathaul::{Error, Result};

/// Tolerance of identities that hold up to rounding.
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Default tolerance of residuals limited by the ODE discretization.
pub const ODE_TOL: f64 = 1e-6;
/// Default tolerance of the gauge transport check.
pub const GAUGE_TOL: f64 = 1e-5;
/// Lower bound a negative control must reach.
pub const NEGATIVE_CONTROL: f64 = 1e-2;
/// Allowed deviation of a measured convergence slope.
pub const SLOPE_TOL: f64 = 0.3;
/// Residual below which a slope is not meaningful.
pub const ROUNDING_FLOOR: f64 = 1e-12;
/// Random decorated morphisms drawn for the functor check.
pub const SDEC_DRAWS: usize = 1000;

/// Raised for inconsistent command-line parameters.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fixture: FixtureFile,
    pub n_steps: usize,
    pub refine: usize,
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(
        fixture: FixtureFile,
        n_steps: usize,
        refine: usize,
        tol: Option<f64>,
        seed: u64,
        out: PathBuf,
    ) -> std::result::Result<Self, ConfigError> {
        if n_steps < 8 {
            return Err(ConfigError(format!(
                "--n-steps must be at least 8, got {n_steps}"
            )));
        }
        if refine < 2 {
            return Err(ConfigError(format!(
                "--refine must be at least 2, got {refine}"
            )));
        }
        if refine > 20 || n_steps >> (refine - 1) < 8 {
            return Err(ConfigError(format!(
                "--refine {refine} halves --n-steps {n_steps} below 8 steps"
            )));
        }
        if let Some(t) = tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(ConfigError(format!("--tol must be positive, got {t}")));
            }
        }
        Ok(RunConfig {
            fixture,
            n_steps,
            refine,
            tol,
            seed,
            out,
        })
    }

    /// `N / 2^(refine-1), ..., N / 2, N`.
    pub fn levels(&self) -> Vec<usize> {
        (0..self.refine).rev().map(|k| self.n_steps >> k).collect()
    }

    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn algebraic_tol(&self) -> f64 {
        self.tol_or(ALGEBRAIC_TOL).min(ALGEBRAIC_TOL)
    }

    fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Loads `builtin:<name>` or a JSON file.
pub fn load_fixture(spec: &str) -> Result<FixtureFile> {
    match spec.strip_prefix("builtin:") {
        Some(name) => FixtureFile::builtin(name),
        None => FixtureFile::load(spec),
    }
}

fn slope(id: &str, levels: &[usize], residuals: &[f64], expected: f64) -> SlopeEntry {
    let mut s = SlopeEntry::fit(id, levels, residuals, expected, SLOPE_TOL);
    if residuals.iter().all(|r| *r <= ROUNDING_FLOOR) {
        s.pass = true;
    }
    s
}

fn push_validation(report: &mut Report, v: &ValidationReport) {
    for a in &v.axioms {
        let mut e = CheckEntry::bound(format!("{}/{}", v.name, a.axiom), a.worst, a.tolerance)
            .with_detail(format!(
                "{} mode, {} checked, {} violations",
                v.mode, a.checked, a.violations
            ));
        e.pass = a.pass;
        report.push(e);
    }
}

/// Crossed-module and categorical-group axioms for every crossed module in
/// the fixture: exhaustive on finite ones, sampled on Lie ones.
pub fn cmd_validate(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let f = &cfg.fixture;
    let mut report = Report::new("validate", &f.name, cfg.seed, cfg.n_steps);
    for spec in &f.finite_crossed_modules {
        let cm = FiniteCrossedModule::from_spec(spec)?;
        push_validation(
            &mut report,
            &validate_crossed_module(&cm, ValidationMode::Exhaustive),
        );
        push_validation(
            &mut report,
            &validate_categorical_group(&cm, ValidationMode::Exhaustive),
        );
    }
    let sampled = ValidationMode::Sampled {
        draws: 1000,
        seed: cfg.seed,
    };
    for name in &f.lie_crossed_modules {
        let cm = lie_crossed_module(name)?;
        push_validation(&mut report, &validate_crossed_module(&cm, sampled));
        push_validation(&mut report, &validate_categorical_group(&cm, sampled));
    }
    if report.entries.is_empty() {
        return Err(Error::Fixture(format!(
            "fixture '{}' lists no crossed modules",
            f.name
        )));
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

fn integrator_order(i: Integrator) -> f64 {
    match i {
        Integrator::ExpMidpoint => 2.0,
        Integrator::Magnus4 => 4.0,
    }
}

fn cc_reports<B: CategoricalBundle>(
    bundle: &B,
    conn: &CatConnection<B::Morphism>,
    battery: &[cathaul::catbundle::CCCase],
    levels: &[usize],
) -> Result<Vec<CCReport>> {
    levels
        .iter()
        .map(|&n| check_cc(bundle, conn, battery, n))
        .collect()
}

fn push_cc(report: &mut Report, label: &str, reports: &[CCReport], tol: f64, algebraic_tol: f64) {
    let last = reports.last().expect("at least two levels");
    for e in &last.entries {
        let bound = if e.axiom == "CC3" { tol } else { algebraic_tol };
        report.push(
            CheckEntry::bound(format!("cc/{label}/{}", e.axiom), e.residual, bound)
                .with_detail(format!("worst case {}", e.worst_case_input_id)),
        );
    }
    let levels: Vec<usize> = reports.iter().map(|r| r.n_steps).collect();
    let cc3: Vec<f64> = reports.iter().map(|r| r.residual("CC3")).collect();
    report.push_slope(slope(&format!("cc/{label}/CC3"), &levels, &cc3, 2.0));
}

fn write_csv<P: PathPoint>(path: &Path, data: &cathaul::paths::SampledPath<P>) -> Result<()> {
    data.write_csv(BufWriter::new(File::create(path)?))
}

/// Largest value of `f` over the battery at each grid size; each case uses
/// the first piece of its split path.
fn worst_over_levels(
    battery: &[cathaul::catbundle::CCCase],
    levels: &[usize],
    f: impl Fn(&cathaul::catbundle::CCCase, usize) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    levels
        .iter()
        .map(|&n| {
            battery
                .par_iter()
                .map(|case| f(case, n))
                .collect::<Result<Vec<f64>>>()
                .map(|v| v.into_iter().fold(0.0, f64::max))
        })
        .collect()
}

/// Horizontal lifts, categorical connection batteries and shifted transport.
/// Bounds are taken over the battery; the lift of the fixture path is
/// reported for reference and written as `transport_lift.csv`.
pub fn cmd_transport(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let f = &cfg.fixture;
    let levels = cfg.levels();
    let mut report = Report::new("transport", &f.name, cfg.seed, cfg.n_steps);
    let conn = f.connection()?;
    let path = f.path()?;
    let p0 = f.start_point()?;
    let order = integrator_order(conn.integrator());

    let lift = horizontal_lift(&conn, &path.sample(cfg.n_steps)?, &p0)?;
    report.push(CheckEntry::info(
        "lift/fixture_path/tangent_residual",
        tangent_residual(&conn, &lift)?,
    ));
    report.push(CheckEntry::info(
        "lift/fixture_path/step_residual",
        step_residual(&conn, &lift)?,
    ));
    write_csv(&cfg.out_file("transport_lift.csv"), &lift)?;

    let battery = f.battery(cfg.seed)?;
    let tol = cfg.tol_or(ODE_TOL);
    let tangent = worst_over_levels(&battery, &levels, |case, n| {
        tangent_residual(
            &conn,
            &horizontal_lift(&conn, &case.first.sample(n)?, &case.point)?,
        )
    })?;
    report.push(CheckEntry::bound(
        "lift/tangent_residual",
        *tangent.last().expect("levels"),
        tol,
    ));
    report.push_slope(slope("lift/tangent_residual", &levels, &tangent, order));

    let pair = Arc::new(PairBundle::new(conn.bundle().clone()));
    let tol = cfg.tol_or(ODE_TOL);
    push_cc(
        &mut report,
        "standard",
        &cc_reports(&*pair, &conn_standard(&conn), &battery, &levels)?,
        tol,
        cfg.algebraic_tol(),
    );
    if f.decoration.is_some() {
        let dec = DecoratedBundle::new(conn.clone(), f.crossed_module()?)?;
        let lifted = conn_lift_dec(&dec);
        let custom = conn_custom_dec(&dec, &f.decoration()?);
        push_cc(
            &mut report,
            "lift_dec",
            &cc_reports(&dec, &lifted, &battery, &levels)?,
            tol,
            cfg.algebraic_tol(),
        );
        push_cc(
            &mut report,
            "custom_dec",
            &cc_reports(&dec, &custom, &battery, &levels)?,
            tol,
            cfg.algebraic_tol(),
        );
        push_cc(
            &mut report,
            "pushforward_dec",
            &cc_reports(
                &*pair,
                &conn_pushforward_dec(&dec, &custom),
                &battery,
                &levels,
            )?,
            tol,
            cfg.algebraic_tol(),
        );
        let general = conn_pushforward_general(&custom, &sdec_pair(&dec), pair.clone());
        push_cc(
            &mut report,
            "pushforward_general",
            &cc_reports(&*pair, &general, &battery, &levels)?,
            tol,
            cfg.algebraic_tol(),
        );
    }

    if f.shift.is_some() {
        let c = f.shift()?;
        let shifted = conn.shifted(&c)?;
        let res = worst_over_levels(&battery, &levels, |case, n| {
            let lift = horizontal_lift(&conn, &case.first.sample(n)?, &case.point)?;
            let xi = shifted_transport(&conn, &c, &lift)?;
            tangent_residual(&shifted, &multiply_path(&lift, &xi)?)
        })?;
        report.push(CheckEntry::bound(
            "shifted/horizontality",
            *res.last().expect("levels"),
            tol,
        ));
        report.push_slope(slope("shifted/horizontality", &levels, &res, 2.0));
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Functor `𝕊`, pushforward well-definedness and its specializations.
pub fn cmd_pushforward(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let f = &cfg.fixture;
    let n = cfg.n_steps;
    let mut report = Report::new("pushforward", &f.name, cfg.seed, n);
    let conn = f.connection()?;
    let dec = DecoratedBundle::new(conn.clone(), f.crossed_module()?)?;
    let pair = Arc::new(PairBundle::new(conn.bundle().clone()));

    let sdec = check_sdec_functor(&dec, SDEC_DRAWS, 100, cfg.seed)?;
    report.push(CheckEntry::bound(
        "sdec/composition",
        sdec.composition,
        cfg.algebraic_tol(),
    ));
    report.push(CheckEntry::bound(
        "sdec/intertwining",
        sdec.intertwining,
        cfg.algebraic_tol(),
    ));

    let custom = match &f.decoration {
        Some(_) => conn_custom_dec(&dec, &f.decoration()?),
        None => conn_lift_dec(&dec),
    };
    let battery = f.battery(cfg.seed)?;
    let s = sdec_pair(&dec);
    let at_identity = conn_pushforward_general(&custom, &s, pair.clone());
    let specialized = conn_pushforward_dec(&dec, &custom);
    let plain = conn_pushforward_dec(&dec, &conn_lift_dec(&dec));
    let standard = conn_standard(&conn);
    let (mut fiber, mut special, mut plain_res, mut equivariance) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for case in &battery {
        let gamma = case.first.sample(n)?;
        let shifted = conn_pushforward_general(
            &custom,
            &s.with_fiber(FiberChoice::Shifted(case.g.clone())),
            pair.clone(),
        );
        let a = at_identity.lift(&gamma, &case.point)?;
        fiber = fiber.max(pp_distance(&a, &shifted.lift(&gamma, &case.point)?));
        special = special.max(pp_distance(&a, &specialized.lift(&gamma, &case.point)?));
        plain_res = plain_res.max(pp_distance(
            &plain.lift(&gamma, &case.point)?,
            &standard.lift(&gamma, &case.point)?,
        ));
        equivariance =
            equivariance.max(s.object_equivariance(&[(case.point.clone(), case.g.clone())]));
    }
    report.push(CheckEntry::bound(
        "pushforward/fiber_independence",
        fiber,
        cfg.tol_or(1e-9),
    ));
    report.push(CheckEntry::bound(
        "pushforward/specialization",
        special,
        cfg.algebraic_tol(),
    ));
    report.push(CheckEntry::bound(
        "pushforward/plain_lift_is_standard",
        plain_res,
        cfg.algebraic_tol(),
    ));
    report.push(CheckEntry::bound(
        "pushforward/object_equivariance",
        equivariance,
        cfg.algebraic_tol(),
    ));
    report.wall_time = start.elapsed();
    Ok(report)
}

fn gauge_variants(g: &CatGaugeTransform, base: usize) -> (CatGaugeTransform, CatGaugeTransform) {
    let cm = g.crossed_module().clone();
    let classical =
        CatGaugeTransform::new(g.theta().clone(), DecorationForm::zero(cm.clone(), base))
            .expect("same crossed module");
    let shift =
        CatGaugeTransform::new(GaugeMap::identity(cm.g().clone(), base), g.lambda().clone())
            .expect("same crossed module");
    (classical, shift)
}

/// Gauge axioms, the transformation law along the fixture path with a
/// refinement study, and the induced pushforward morphism. Writes the
/// candidate path as `gauge_candidate.csv` and the independent lift under
/// the transformed connection as `gauge_direct.csv`.
pub fn cmd_gauge(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let f = &cfg.fixture;
    let n = cfg.n_steps;
    let levels = cfg.levels();
    let mut report = Report::new("gauge", &f.name, cfg.seed, n);
    let conn = f.connection()?;
    let gauge = f.gauge()?;
    let path = f.path()?;
    let p0 = f.start_point()?;
    let battery = f.battery(cfg.seed)?;
    let ode_tol = cfg.tol_or(ODE_TOL);
    let gauge_tol = cfg.tol_or(GAUGE_TOL);

    let axioms = gauge_check_axioms(&conn, &gauge, &battery, n, cfg.seed)?;
    for e in &axioms.entries {
        let id = format!("axioms/{}", e.axiom);
        let entry = match e.class {
            AxiomClass::Algebraic => CheckEntry::bound(id, e.residual, cfg.algebraic_tol()),
            AxiomClass::Ode => CheckEntry::bound(id, e.residual, ode_tol),
            AxiomClass::Info => CheckEntry::info(id, e.residual),
        };
        report.push(entry.with_detail(format!("worst case {}", e.worst_case_input_id)));
    }
    if !matches!(
        f.gauge.as_ref().map(|g| &g.theta),
        Some(ThetaSpec::Identity)
    ) {
        let naive = gauge_check_axioms(&conn, &gauge.naive(), &battery, n, cfg.seed)?;
        report.push(CheckEntry::at_least(
            "axioms/negative_control/theta_equivariance",
            naive.residual("theta_equivariance"),
            NEGATIVE_CONTROL,
        ));
    }

    let mut horiz = vec![];
    let mut endpoint = vec![];
    for &m in &levels {
        let gamma = path.sample(m)?;
        let r = gengauge_transport_check(&conn, &gauge, &gamma, &p0, TransformLaw::Literal)?;
        horiz.push(r.horizontality);
        endpoint.push(r.endpoint);
        if m == n {
            report.push(CheckEntry::bound(
                "transport/initial_point",
                r.initial_point,
                1e-12,
            ));
            report.push(CheckEntry::bound(
                "transport/horizontality",
                r.horizontality,
                gauge_tol,
            ));
            report.push(CheckEntry::bound(
                "transport/endpoint",
                r.endpoint,
                gauge_tol,
            ));
            report.push(CheckEntry::info(
                "transport/tangent_horizontality",
                r.tangent_horizontality,
            ));
            report.push(CheckEntry::info(
                "transport/literal_law_defect",
                r.literal_law_defect,
            ));
            let alt =
                gengauge_transport_check(&conn, &gauge, &gamma, &p0, TransformLaw::ShiftFirst)?;
            report.push(CheckEntry::info(
                "transport/shift_first/horizontality",
                alt.horizontality,
            ));
            report.push(CheckEntry::info(
                "transport/shift_first/endpoint",
                alt.endpoint,
            ));
            let (classical, shift) = gauge_variants(&gauge, f.base_dim);
            for (label, g) in [("classical", &classical), ("pure_shift", &shift)] {
                let r = gengauge_transport_check(&conn, g, &gamma, &p0, TransformLaw::Literal)?;
                report.push(CheckEntry::bound(
                    format!("transport/{label}/horizontality"),
                    r.horizontality,
                    ode_tol,
                ));
                report.push(CheckEntry::bound(
                    format!("transport/{label}/endpoint"),
                    r.endpoint,
                    ode_tol,
                ));
            }
            let induced = induced_pushforward_morphism(&conn, &gauge, &gamma, &p0)?;
            let cand = gengauge_candidate(&conn, &gauge, &gamma, &p0)?;
            report.push(CheckEntry::info(
                "induced/stated_form_defect",
                induced.defect,
            ));
            report.push(CheckEntry::bound(
                "induced/conjugated_endpoint",
                induced.conjugated_endpoint.distance(cand.end()),
                cfg.algebraic_tol(),
            ));
            write_csv(&cfg.out_file("gauge_candidate.csv"), &cand)?;
            let transformed = cathaul::gauge::transformed_connection(&conn, &gauge)?;
            write_csv(
                &cfg.out_file("gauge_direct.csv"),
                &horizontal_lift(&transformed, &gamma, &p0)?,
            )?;
        }
    }
    report.push_slope(slope("transport/horizontality", &levels, &horiz, 2.0));
    report.push_slope(slope("transport/endpoint", &levels, &endpoint, 2.0));
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Writes `<suite>.json` into the output directory.
pub fn write_report(cfg: &RunConfig, report: &Report) -> Result<PathBuf> {
    let path = cfg.out_file(&format!("{}.json", report.suite));
    std::fs::write(&path, report.to_json() + "\n")?;
    Ok(path)
}
