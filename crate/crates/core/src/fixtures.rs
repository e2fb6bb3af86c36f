//! Shipped test beds and the JSON fixture format read by the command line.
//!
//! The SU(2) test bed lives on the unit square with the inner crossed module
//! `(SU(2), SU(2), id, conj)`. Its connection, decoration and gauge data are
//! smooth non-constant fields so that every ODE in the crate is exercised
//! with curvature.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::finite::FiniteCrossedModuleSpec;
use crate::algebra::FiniteCrossedModule;
use crate::bundle::{
    BundlePoint, CoefficientField, CoefficientSpec, ConnectionForm, Integrator, ShiftForm,
    TrivialBundle,
};
use crate::catbundle::CCCase;
use crate::error::{Error, Result};
use crate::gauge::{CatGaugeTransform, DecorationForm, GaugeMap, ThetaSpec};
use crate::lie::crossed::LieCrossedModule;
use crate::lie::MatrixLieGroup;
use crate::paths::PathSpec;

/// Seed used for every shipped random battery.
pub const DEFAULT_SEED: u64 = 42;

/// Number of cases in the categorical connection battery.
pub const BATTERY_SIZE: usize = 20;

pub fn testbed_bundle() -> TrivialBundle {
    TrivialBundle::new(2, MatrixLieGroup::su2())
}

pub fn testbed_crossed_module() -> LieCrossedModule {
    LieCrossedModule::su2_inner()
}

/// Curved `su(2)` coefficients: an affine field plus a plane wave.
pub fn connection_spec() -> CoefficientSpec {
    CoefficientSpec::Sum {
        terms: vec![
            CoefficientSpec::Linear {
                constant: vec![vec![0.3, -0.2, 0.5], vec![-0.4, 0.6, 0.1]],
                gradient: vec![
                    vec![vec![0.2, 0.7, -0.3], vec![0.5, -0.1, 0.4]],
                    vec![vec![-0.6, 0.3, 0.2], vec![0.1, 0.4, -0.5]],
                ],
            },
            CoefficientSpec::Trigonometric {
                wavevector: vec![2.0, -1.5],
                sin: vec![vec![0.4, 0.0, -0.3], vec![0.2, -0.5, 0.1]],
                cos: vec![vec![-0.1, 0.3, 0.2], vec![0.3, 0.1, -0.4]],
            },
        ],
    }
}

pub fn testbed_connection() -> ConnectionForm {
    ConnectionForm::from_spec(testbed_bundle(), &connection_spec())
        .expect("shipped connection is well formed")
}

/// `L(H)`-valued decoration coefficients for the test bed.
pub fn decoration_spec() -> CoefficientSpec {
    CoefficientSpec::Sum {
        terms: vec![
            CoefficientSpec::Linear {
                constant: vec![vec![0.5, 0.1, -0.3], vec![-0.2, 0.4, 0.6]],
                gradient: vec![
                    vec![vec![0.3, -0.4, 0.1], vec![0.0, 0.2, -0.6]],
                    vec![vec![-0.5, 0.2, 0.4], vec![0.3, -0.3, 0.1]],
                ],
            },
            CoefficientSpec::Trigonometric {
                wavevector: vec![-1.0, 2.5],
                sin: vec![vec![0.2, 0.3, 0.0], vec![-0.4, 0.1, 0.2]],
                cos: vec![vec![0.1, -0.2, 0.3], vec![0.0, 0.3, -0.1]],
            },
        ],
    }
}

pub fn testbed_decoration() -> DecorationForm {
    DecorationForm::from_spec(testbed_crossed_module(), &decoration_spec(), 2)
        .expect("shipped decoration is well formed")
}

/// `θ̄(x) = exp(c + x_1 s_1 + x_2 s_2)`.
pub fn theta_spec() -> ThetaSpec {
    ThetaSpec::ExpLinear {
        constant: vec![0.3, -0.2, 0.4],
        slopes: vec![vec![0.8, 0.1, -0.5], vec![-0.3, 0.6, 0.7]],
    }
}

pub fn testbed_theta() -> GaugeMap {
    GaugeMap::from_spec(&theta_spec(), MatrixLieGroup::su2(), 2)
        .expect("shipped theta is well formed")
}

/// Non-constant `θ̄` and `λ`.
pub fn testbed_gauge() -> CatGaugeTransform {
    CatGaugeTransform::new(testbed_theta(), testbed_decoration())
        .expect("shipped gauge is well formed")
}

/// Non-constant `θ̄` with `λ ≡ 0`.
pub fn classical_gauge() -> CatGaugeTransform {
    CatGaugeTransform::new(
        testbed_theta(),
        DecorationForm::zero(testbed_crossed_module(), 2),
    )
    .expect("shipped gauge is well formed")
}

/// `θ̄ ≡ e` with the test-bed `λ`.
pub fn shift_gauge() -> CatGaugeTransform {
    CatGaugeTransform::new(
        GaugeMap::identity(MatrixLieGroup::su2(), 2),
        testbed_decoration(),
    )
    .expect("shipped gauge is well formed")
}

/// A second transformation used to compose with [`testbed_gauge`].
pub fn second_gauge() -> CatGaugeTransform {
    let theta = GaugeMap::from_spec(
        &ThetaSpec::ExpLinear {
            constant: vec![-0.1, 0.5, 0.2],
            slopes: vec![vec![0.2, -0.6, 0.3], vec![0.4, 0.3, -0.2]],
        },
        MatrixLieGroup::su2(),
        2,
    )
    .expect("shipped theta is well formed");
    let lambda = DecorationForm::from_spec(
        testbed_crossed_module(),
        &CoefficientSpec::Trigonometric {
            wavevector: vec![1.5, 1.0],
            sin: vec![vec![0.3, -0.2, 0.1], vec![0.1, 0.4, -0.3]],
            cos: vec![vec![0.0, 0.2, 0.4], vec![-0.3, 0.1, 0.2]],
        },
        2,
    )
    .expect("shipped decoration is well formed");
    CatGaugeTransform::new(theta, lambda).expect("shipped gauge is well formed")
}

/// The test-bed `θ̄` with `λ = Ad(θ̄) a - a - (dθ̄) θ̄^-1`. Along every
/// horizontal path this keeps `θ_(γ̃(t)) = τ(h_γ̃(t)) θ_p`, so the gauge
/// transformation preserves targets.
pub fn compatible_gauge() -> CatGaugeTransform {
    let theta = testbed_theta();
    let a = testbed_connection().coefficients().clone();
    let t = theta.clone();
    let coeffs = CoefficientField::from_fn(3, 2, "compatible", move |x| {
        let tb = t.theta_bar(x);
        let ax = a.eval(x);
        let mut m = DMatrix::zeros(3, 2);
        for mu in 0..2 {
            let col: DVector<f64> = ax.column(mu).into();
            m.set_column(mu, &(tb.adjoint(&col) - &col));
        }
        m - t.dtheta(x)
    });
    let lambda = DecorationForm::new(testbed_crossed_module(), coeffs).expect("dimensions match");
    CatGaugeTransform::new(theta, lambda).expect("shipped gauge is well formed")
}

/// Shift coefficients `C` for the shifted-transport check.
pub fn shift_spec() -> CoefficientSpec {
    CoefficientSpec::Linear {
        constant: vec![vec![0.2, 0.4, -0.1], vec![0.3, -0.2, 0.5]],
        gradient: vec![
            vec![vec![-0.3, 0.1, 0.2], vec![0.4, 0.0, -0.2]],
            vec![vec![0.1, -0.5, 0.3], vec![-0.2, 0.3, 0.1]],
        ],
    }
}

pub fn testbed_shift() -> ShiftForm {
    ShiftForm::new(
        CoefficientField::from_spec(&shift_spec(), 3, 2).expect("shipped shift is well formed"),
    )
}

/// The base path of the gauge transport check: an arc followed by a line.
pub fn gauge_path() -> PathSpec {
    PathSpec::arc(&[0.5, 0.5], 0.3, -0.5, 2.0, 1.0).then(&PathSpec::line(
        &[0.5 + 0.3 * 2.0f64.cos(), 0.5 + 0.3 * 2.0f64.sin()],
        &[0.85, 0.15],
        1.0,
    ))
}

/// Fiber coordinates of the starting point used with [`gauge_path`].
pub fn gauge_start() -> Vec<f64> {
    vec![0.3, 0.2, 0.1]
}

fn coord<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// A deterministic battery of split paths inside `[0.05, 0.95]^2`: straight
/// lines cut in two, circular arcs cut in two, and L-shaped composites of a
/// horizontal and a vertical segment, each piece of unit duration.
pub fn cc_battery(group: &Arc<MatrixLieGroup>, seed: u64) -> Vec<CCCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..BATTERY_SIZE)
        .map(|i| {
            let (kind, first, second) = match i % 3 {
                0 => {
                    let a = [coord(&mut rng, 0.05, 0.95), coord(&mut rng, 0.05, 0.95)];
                    let c = [coord(&mut rng, 0.05, 0.95), coord(&mut rng, 0.05, 0.95)];
                    let s: f64 = coord(&mut rng, 0.3, 0.7);
                    let b = [a[0] + s * (c[0] - a[0]), a[1] + s * (c[1] - a[1])];
                    (
                        "line",
                        PathSpec::line(&a, &b, 1.0),
                        PathSpec::line(&b, &c, 1.0),
                    )
                }
                1 => {
                    let center = [coord(&mut rng, 0.3, 0.7), coord(&mut rng, 0.3, 0.7)];
                    let r = coord(&mut rng, 0.08, 0.22);
                    let a0 = coord(&mut rng, -3.0, 3.0);
                    let sweep =
                        coord(&mut rng, 1.0, 4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let mid = a0 + sweep * coord(&mut rng, 0.3, 0.7);
                    (
                        "arc",
                        PathSpec::arc(&center, r, a0, mid, 1.0),
                        PathSpec::arc(&center, r, mid, a0 + sweep, 1.0),
                    )
                }
                _ => {
                    let a = [coord(&mut rng, 0.05, 0.95), coord(&mut rng, 0.05, 0.95)];
                    let b = [coord(&mut rng, 0.05, 0.95), a[1]];
                    let c = [b[0], coord(&mut rng, 0.05, 0.95)];
                    (
                        "l",
                        PathSpec::line(&a, &b, 1.0),
                        PathSpec::line(&b, &c, 1.0),
                    )
                }
            };
            let x = first.start();
            let point = BundlePoint::new(x, group.sample(&mut rng, 1.0));
            CCCase {
                id: format!("{kind}-{i:02}"),
                first,
                second,
                point,
                g: group.sample(&mut rng, 1.0),
            }
        })
        .collect()
}

/// Looks up a shipped Lie crossed module (`su2_inner`, `so3_su2`).
pub fn lie_crossed_module(name: &str) -> Result<LieCrossedModule> {
    match name {
        "su2_inner" => Ok(LieCrossedModule::su2_inner()),
        "so3_su2" => Ok(LieCrossedModule::so3_su2()),
        other => Err(Error::Fixture(format!(
            "unknown Lie crossed module '{other}'"
        ))),
    }
}

/// Gauge data: `θ̄` and `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeSpec {
    pub theta: ThetaSpec,
    pub lambda: CoefficientSpec,
}

fn default_crossed_module() -> String {
    "su2_inner".into()
}

fn default_base_dim() -> usize {
    2
}

fn default_battery_size() -> usize {
    BATTERY_SIZE
}

/// A fixture file. Every section is optional so that one format serves all
/// subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    pub name: String,
    #[serde(default)]
    pub finite_crossed_modules: Vec<FiniteCrossedModuleSpec>,
    #[serde(default)]
    pub lie_crossed_modules: Vec<String>,
    #[serde(default = "default_crossed_module")]
    pub crossed_module: String,
    #[serde(default = "default_base_dim")]
    pub base_dim: usize,
    #[serde(default)]
    pub connection: Option<CoefficientSpec>,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub shift: Option<CoefficientSpec>,
    #[serde(default)]
    pub decoration: Option<CoefficientSpec>,
    #[serde(default)]
    pub gauge: Option<GaugeSpec>,
    #[serde(default)]
    pub path: Option<PathSpec>,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default = "default_battery_size")]
    pub battery_size: usize,
}

impl FixtureFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: FixtureFile =
            serde_json::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixtures serialize")
    }

    /// Names of the fixtures compiled into the crate.
    pub fn builtin_names() -> &'static [&'static str] {
        &["s3_a3", "inner_d4", "su2_testbed", "identity_gauge"]
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let empty = FixtureFile {
            name: name.to_string(),
            finite_crossed_modules: vec![],
            lie_crossed_modules: vec![],
            crossed_module: default_crossed_module(),
            base_dim: 2,
            connection: None,
            integrator: Integrator::default(),
            shift: None,
            decoration: None,
            gauge: None,
            path: None,
            start: None,
            battery_size: BATTERY_SIZE,
        };
        let testbed = FixtureFile {
            connection: Some(connection_spec()),
            shift: Some(shift_spec()),
            decoration: Some(decoration_spec()),
            path: Some(gauge_path()),
            start: Some(gauge_start()),
            ..empty.clone()
        };
        match name {
            "s3_a3" => Ok(FixtureFile {
                finite_crossed_modules: vec![FiniteCrossedModule::s3_a3().to_spec()],
                ..empty
            }),
            "inner_d4" => Ok(FixtureFile {
                finite_crossed_modules: vec![FiniteCrossedModule::inner_d4().to_spec()],
                ..empty
            }),
            "su2_testbed" => Ok(FixtureFile {
                lie_crossed_modules: vec!["su2_inner".into(), "so3_su2".into()],
                gauge: Some(GaugeSpec {
                    theta: theta_spec(),
                    lambda: decoration_spec(),
                }),
                ..testbed
            }),
            "identity_gauge" => Ok(FixtureFile {
                gauge: Some(GaugeSpec {
                    theta: ThetaSpec::Identity,
                    lambda: CoefficientSpec::Zero,
                }),
                ..testbed
            }),
            other => Err(Error::Fixture(format!("unknown builtin fixture '{other}'"))),
        }
    }

    /// Builds every object the file describes once, reporting the first
    /// malformed section.
    pub fn validate(&self) -> Result<()> {
        if self.base_dim == 0 {
            return Err(Error::Fixture("base_dim must be positive".into()));
        }
        if self.battery_size == 0 {
            return Err(Error::Fixture("battery_size must be positive".into()));
        }
        for spec in &self.finite_crossed_modules {
            FiniteCrossedModule::from_spec(spec)?;
        }
        for name in &self.lie_crossed_modules {
            lie_crossed_module(name)?;
        }
        self.crossed_module()?;
        if self.connection.is_some() {
            self.connection()?;
        }
        if self.shift.is_some() {
            self.shift()?;
        }
        if self.decoration.is_some() {
            self.decoration()?;
        }
        if self.gauge.is_some() {
            self.gauge()?;
        }
        if let Some(p) = &self.path {
            p.validate()?;
            if p.dim() != self.base_dim {
                return Err(Error::Fixture(format!(
                    "path has dimension {} but base_dim is {}",
                    p.dim(),
                    self.base_dim
                )));
            }
        }
        if self.start.is_some() {
            self.start_point()?;
        }
        Ok(())
    }

    pub fn crossed_module(&self) -> Result<LieCrossedModule> {
        lie_crossed_module(&self.crossed_module)
    }

    pub fn bundle(&self) -> Result<TrivialBundle> {
        Ok(TrivialBundle::new(
            self.base_dim,
            self.crossed_module()?.g().clone(),
        ))
    }

    pub fn connection(&self) -> Result<ConnectionForm> {
        let spec = self
            .connection
            .as_ref()
            .ok_or_else(|| Error::Fixture(format!("fixture '{}' has no connection", self.name)))?;
        Ok(ConnectionForm::from_spec(self.bundle()?, spec)?.with_integrator(self.integrator))
    }

    pub fn shift(&self) -> Result<ShiftForm> {
        let spec = self
            .shift
            .as_ref()
            .ok_or_else(|| Error::Fixture(format!("fixture '{}' has no shift", self.name)))?;
        let alg = self.crossed_module()?.g().dim();
        Ok(ShiftForm::new(CoefficientField::from_spec(
            spec,
            alg,
            self.base_dim,
        )?))
    }

    pub fn decoration(&self) -> Result<DecorationForm> {
        let spec = self
            .decoration
            .as_ref()
            .ok_or_else(|| Error::Fixture(format!("fixture '{}' has no decoration", self.name)))?;
        DecorationForm::from_spec(self.crossed_module()?, spec, self.base_dim)
    }

    pub fn gauge(&self) -> Result<CatGaugeTransform> {
        let spec = self
            .gauge
            .as_ref()
            .ok_or_else(|| Error::Fixture(format!("fixture '{}' has no gauge", self.name)))?;
        let cm = self.crossed_module()?;
        let theta = GaugeMap::from_spec(&spec.theta, cm.g().clone(), self.base_dim)?;
        let lambda = DecorationForm::from_spec(cm, &spec.lambda, self.base_dim)?;
        CatGaugeTransform::new(theta, lambda)
    }

    pub fn path(&self) -> Result<PathSpec> {
        self.path
            .clone()
            .ok_or_else(|| Error::Fixture(format!("fixture '{}' has no path", self.name)))
    }

    /// The starting point over the path's start, its fiber coordinate given
    /// in the algebra of `G`.
    pub fn start_point(&self) -> Result<BundlePoint> {
        let group = self.crossed_module()?.g().clone();
        let coords = self.start.clone().unwrap_or_else(|| vec![0.0; group.dim()]);
        if coords.len() != group.dim() || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Fixture(format!(
                "start must be {} finite coordinates",
                group.dim()
            )));
        }
        let x = self.path()?.start();
        Ok(BundlePoint::new(x, group.exp(&DVector::from_vec(coords))))
    }

    pub fn battery(&self, seed: u64) -> Result<Vec<CCCase>> {
        let group = self.crossed_module()?.g().clone();
        let mut battery = cc_battery(&group, seed);
        battery.truncate(self.battery_size);
        Ok(battery)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_stays_inside_the_domain() {
        let bundle = testbed_bundle();
        let battery = cc_battery(bundle.group(), DEFAULT_SEED);
        assert_eq!(battery.len(), BATTERY_SIZE);
        for case in &battery {
            let path = case.whole().sample(200).unwrap();
            for x in path.samples() {
                assert!(
                    x.iter().all(|v| (0.05 - 1e-12..=0.95 + 1e-12).contains(v)),
                    "{}",
                    case.id
                );
            }
            assert!((case.first.end() - case.second.start()).norm() <= 1e-12);
        }
        let kinds: Vec<&str> = battery
            .iter()
            .map(|c| c.id.split('-').next().unwrap())
            .collect();
        for k in ["line", "arc", "l"] {
            assert!(kinds.contains(&k));
        }
    }

    #[test]
    fn battery_is_deterministic() {
        let g = MatrixLieGroup::su2();
        let a = cc_battery(&g, 7);
        let b = cc_battery(&g, 7);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.first, y.first);
            assert_eq!(x.g.matrix(), y.g.matrix());
        }
    }

    #[test]
    fn gauge_path_stays_inside_the_box() {
        let path = gauge_path().sample(400).unwrap();
        assert!(testbed_bundle().check_path(&path).is_ok());
    }

    #[test]
    fn builtins_round_trip_through_json() {
        for name in FixtureFile::builtin_names() {
            let f = FixtureFile::builtin(name).unwrap();
            f.validate().unwrap();
            assert_eq!(FixtureFile::from_json(&f.to_json()).unwrap(), f);
        }
    }

    #[test]
    fn malformed_fixtures_are_rejected() {
        let mut f = FixtureFile::builtin("su2_testbed").unwrap();
        f.crossed_module = "nope".into();
        assert!(matches!(f.validate(), Err(Error::Fixture(_))));
        let mut f = FixtureFile::builtin("su2_testbed").unwrap();
        f.start = Some(vec![0.0]);
        assert!(f.validate().is_err());
        assert!(FixtureFile::from_json("{\"name\": 3}").is_err());
        assert!(FixtureFile::from_json("{\"name\": \"x\", \"extra\": 1}").is_err());
    }
}
