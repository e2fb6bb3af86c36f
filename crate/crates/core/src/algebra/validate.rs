use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    cg_compose, cg_distance, cg_identity, cg_inverse, cg_mul, cg_source, cg_target, functor_s,
    gdd_compose, gdd_distance, gdd_mul, CatGroupMorphism, CrossedModule, GElem, Group, HElem, Mor,
};

/// How a validation run chooses its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// Every tuple of elements; falls back to sampling for infinite groups.
    Exhaustive,
    /// `draws` random tuples from a seeded generator.
    Sampled { draws: usize, seed: u64 },
}

/// Default sampled mode used when exhaustive enumeration is impossible.
pub const DEFAULT_SAMPLED: ValidationMode = ValidationMode::Sampled {
    draws: 1000,
    seed: 42,
};

/// Outcome of one axiom.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomResult {
    pub axiom: String,
    pub pass: bool,
    pub checked: usize,
    pub violations: usize,
    /// Largest residual seen; the discrete metric makes this 0 or 1 for
    /// finite groups.
    pub worst: f64,
    pub tolerance: f64,
    /// First violating input, if any.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub mode: String,
    pub axioms: Vec<AxiomResult>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }

    pub fn axiom(&self, name: &str) -> Option<&AxiomResult> {
        self.axioms.iter().find(|a| a.axiom == name)
    }
}

struct Tally {
    axiom: &'static str,
    tolerance: f64,
    checked: usize,
    violations: usize,
    worst: f64,
    witness: Option<String>,
}

impl Tally {
    fn new(axiom: &'static str, tolerance: f64) -> Self {
        Tally {
            axiom,
            tolerance,
            checked: 0,
            violations: 0,
            worst: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, residual: f64, witness: impl FnOnce() -> String) {
        self.checked += 1;
        self.worst = self.worst.max(residual);
        if !(residual <= self.tolerance) {
            self.violations += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    fn finish(self) -> AxiomResult {
        AxiomResult {
            axiom: self.axiom.to_string(),
            pass: self.violations == 0,
            checked: self.checked,
            violations: self.violations,
            worst: self.worst,
            tolerance: self.tolerance,
            witness: self.witness,
        }
    }
}

/// Elements used by a run. In exhaustive mode tuples range over the full
/// cartesian product; in sampled mode tuple `i` uses draws `i`, `n + i`, ...
struct Pool<T> {
    items: Vec<T>,
    draws: usize,
    exhaustive: bool,
}

impl<T: Clone> Pool<T> {
    fn new<Gr: Group<Elem = T>>(
        group: &Gr,
        mode: ValidationMode,
        rng: &mut ChaCha8Rng,
        arity: usize,
    ) -> Self {
        match (mode, group.enumerate()) {
            (ValidationMode::Exhaustive, Some(items)) => Pool {
                draws: items.len(),
                items,
                exhaustive: true,
            },
            (ValidationMode::Sampled { draws, .. }, _) => Self::sampled(group, draws, rng, arity),
            (ValidationMode::Exhaustive, None) => match DEFAULT_SAMPLED {
                ValidationMode::Sampled { draws, .. } => Self::sampled(group, draws, rng, arity),
                ValidationMode::Exhaustive => unreachable!(),
            },
        }
    }

    fn sampled<Gr: Group<Elem = T>>(
        group: &Gr,
        draws: usize,
        rng: &mut ChaCha8Rng,
        arity: usize,
    ) -> Self {
        Pool {
            items: (0..draws * arity).map(|_| group.draw(rng)).collect(),
            draws,
            exhaustive: false,
        }
    }

    fn get(&self, slot: usize, i: usize) -> &T {
        &self.items[slot * self.draws + i]
    }
}

fn pairs<A: Clone, B: Clone>(a: &Pool<A>, b: &Pool<B>) -> Vec<(A, B)> {
    if a.exhaustive && b.exhaustive {
        let mut out = Vec::with_capacity(a.items.len() * b.items.len());
        for x in &a.items {
            for y in &b.items {
                out.push((x.clone(), y.clone()));
            }
        }
        out
    } else {
        let n = a.draws.min(b.draws);
        (0..n)
            .map(|i| (a.get(0, i).clone(), b.get(1, i).clone()))
            .collect()
    }
}

fn triples<A: Clone, B: Clone, C: Clone>(a: &Pool<A>, b: &Pool<B>, c: &Pool<C>) -> Vec<(A, B, C)> {
    if a.exhaustive && b.exhaustive && c.exhaustive {
        let mut out = Vec::with_capacity(a.items.len() * b.items.len() * c.items.len());
        for x in &a.items {
            for y in &b.items {
                for z in &c.items {
                    out.push((x.clone(), y.clone(), z.clone()));
                }
            }
        }
        out
    } else {
        let n = a.draws.min(b.draws).min(c.draws);
        (0..n)
            .map(|i| {
                (
                    a.get(0, i).clone(),
                    b.get(1, i).clone(),
                    c.get(2, i).clone(),
                )
            })
            .collect()
    }
}

fn mode_label(mode: ValidationMode, exhaustive: bool) -> String {
    match (mode, exhaustive) {
        (_, true) => "exhaustive".to_string(),
        (ValidationMode::Sampled { draws, seed }, false) => {
            format!("sampled(n={draws}, seed={seed})")
        }
        (ValidationMode::Exhaustive, false) => match DEFAULT_SAMPLED {
            ValidationMode::Sampled { draws, seed } => format!("sampled(n={draws}, seed={seed})"),
            ValidationMode::Exhaustive => unreachable!(),
        },
    }
}

fn seed_of(mode: ValidationMode) -> u64 {
    match mode {
        ValidationMode::Sampled { seed, .. } => seed,
        ValidationMode::Exhaustive => match DEFAULT_SAMPLED {
            ValidationMode::Sampled { seed, .. } => seed,
            ValidationMode::Exhaustive => unreachable!(),
        },
    }
}

/// Checks that `tau` is a homomorphism, that `alpha` is an action by
/// automorphisms, and both Peiffer identities. Failures are report entries.
pub fn validate_crossed_module<C: CrossedModule + ?Sized>(
    cm: &C,
    mode: ValidationMode,
) -> ValidationReport {
    let g = cm.g_group();
    let h = cm.h_group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed_of(mode));
    let gs = Pool::new(g, mode, &mut rng, 3);
    let hs = Pool::new(h, mode, &mut rng, 3);
    let tol_g = g.tolerance();
    let tol_h = h.tolerance();
    let gl = |x: &GElem<C>| g.label(x);
    let hl = |x: &HElem<C>| h.label(x);

    let mut tau_hom = Tally::new("tau_homomorphism", tol_g);
    for (h1, h2) in pairs(&hs, &hs) {
        let lhs = cm.tau(&h.op(&h1, &h2));
        let rhs = g.op(&cm.tau(&h1), &cm.tau(&h2));
        tau_hom.record(g.dist(&lhs, &rhs), || {
            format!("h1={}, h2={}", hl(&h1), hl(&h2))
        });
    }

    let mut automorphism = Tally::new("alpha_automorphism", tol_h);
    for (a, h1, h2) in triples(&gs, &hs, &hs) {
        let lhs = cm.alpha(&a, &h.op(&h1, &h2));
        let rhs = h.op(&cm.alpha(&a, &h1), &cm.alpha(&a, &h2));
        let back = cm.alpha(&g.inv(&a), &cm.alpha(&a, &h1));
        let r = h.dist(&lhs, &rhs).max(h.dist(&back, &h1));
        automorphism.record(r, || {
            format!("g={}, h1={}, h2={}", gl(&a), hl(&h1), hl(&h2))
        });
    }

    let mut action = Tally::new("alpha_action", tol_h);
    for (a, b, x) in triples(&gs, &gs, &hs) {
        let lhs = cm.alpha(&g.op(&a, &b), &x);
        let rhs = cm.alpha(&a, &cm.alpha(&b, &x));
        let unit = cm.alpha(&g.identity(), &x);
        let r = h.dist(&lhs, &rhs).max(h.dist(&unit, &x));
        action.record(r, || format!("g1={}, g2={}, h={}", gl(&a), gl(&b), hl(&x)));
    }

    let mut peiffer1 = Tally::new("peiffer_1", tol_g);
    for (a, x) in pairs(&gs, &hs) {
        let lhs = cm.tau(&cm.alpha(&a, &x));
        let rhs = g.op(&g.op(&a, &cm.tau(&x)), &g.inv(&a));
        peiffer1.record(g.dist(&lhs, &rhs), || format!("g={}, h={}", gl(&a), hl(&x)));
    }

    let mut peiffer2 = Tally::new("peiffer_2", tol_h);
    for (x, y) in pairs(&hs, &hs) {
        let lhs = cm.alpha(&cm.tau(&x), &y);
        let rhs = h.op(&h.op(&x, &y), &h.inv(&x));
        peiffer2.record(h.dist(&lhs, &rhs), || {
            format!("h={}, h'={}", hl(&x), hl(&y))
        });
    }

    ValidationReport {
        name: cm.name(),
        mode: mode_label(mode, gs.exhaustive && hs.exhaustive),
        axioms: vec![
            tau_hom.finish(),
            automorphism.finish(),
            action.finish(),
            peiffer1.finish(),
            peiffer2.finish(),
        ],
    }
}

fn label_mor<C: CrossedModule + ?Sized>(cm: &C, m: &Mor<C>) -> String {
    format!(
        "({}, {})",
        cm.h_group().label(&m.h),
        cm.g_group().label(&m.g)
    )
}

/// Checks the categorical-group laws of `H x_alpha G`: interchange, source and
/// target homomorphisms, associativity and units of composition, group laws of
/// the semidirect product, and that `S` is a functor and a homomorphism.
pub fn validate_categorical_group<C: CrossedModule + ?Sized>(
    cm: &C,
    mode: ValidationMode,
) -> ValidationReport {
    let g = cm.g_group();
    let h = cm.h_group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed_of(mode));
    let gs = Pool::new(g, mode, &mut rng, 3);
    let hs = Pool::new(h, mode, &mut rng, 3);
    let exhaustive = gs.exhaustive && hs.exhaustive;
    let tol = g.tolerance().max(h.tolerance());

    // Morphisms and composable pairs (m1, m2) with m2 = (h2, t(m1)).
    let morphisms: Vec<Mor<C>> = pairs(&hs, &gs)
        .into_iter()
        .map(|(x, a)| CatGroupMorphism::new(x, a))
        .collect();
    let composable: Vec<(Mor<C>, Mor<C>)> = triples(&hs, &gs, &hs)
        .into_iter()
        .map(|(h1, g1, h2)| {
            let m1 = CatGroupMorphism::new(h1, g1);
            let m2 = CatGroupMorphism::new(h2, cg_target(cm, &m1));
            (m1, m2)
        })
        .collect();

    let mut interchange = Tally::new("interchange", tol);
    let quadruples: Vec<(usize, usize)> = if exhaustive {
        (0..composable.len())
            .flat_map(|i| (0..composable.len()).map(move |j| (i, j)))
            .collect()
    } else {
        (0..composable.len())
            .map(|i| (i, (i + 1) % composable.len()))
            .collect()
    };
    for (i, j) in quadruples {
        let (a1, a2) = &composable[i];
        let (b1, b2) = &composable[j];
        let lhs = cg_compose(cm, &cg_mul(cm, a2, b2), &cg_mul(cm, a1, b1));
        let rhs =
            cg_compose(cm, a2, a1).and_then(|a| cg_compose(cm, b2, b1).map(|b| cg_mul(cm, &a, &b)));
        let r = match (lhs, rhs) {
            (Ok(l), Ok(r)) => cg_distance(cm, &l, &r),
            _ => 1.0,
        };
        interchange.record(r, || {
            format!(
                "a1={}, a2={}, b1={}, b2={}",
                label_mor(cm, a1),
                label_mor(cm, a2),
                label_mor(cm, b1),
                label_mor(cm, b2)
            )
        });
    }

    let mut source_hom = Tally::new("source_homomorphism", tol);
    let mut target_hom = Tally::new("target_homomorphism", tol);
    let mut s_product = Tally::new("functor_s_product", tol);
    let mut semidirect = Tally::new("semidirect_group_laws", tol);
    let mor_pairs: Vec<(Mor<C>, Mor<C>)> = if exhaustive {
        let mut out = Vec::new();
        for a in &morphisms {
            for b in &morphisms {
                out.push((a.clone(), b.clone()));
            }
        }
        out
    } else {
        (0..morphisms.len())
            .map(|i| {
                (
                    morphisms[i].clone(),
                    morphisms[(i + 1) % morphisms.len()].clone(),
                )
            })
            .collect()
    };
    for (a, b) in &mor_pairs {
        let ab = cg_mul(cm, a, b);
        let w = || format!("a={}, b={}", label_mor(cm, a), label_mor(cm, b));
        source_hom.record(
            g.dist(
                &cg_source(cm, &ab),
                &g.op(&cg_source(cm, a), &cg_source(cm, b)),
            ),
            w,
        );
        target_hom.record(
            g.dist(
                &cg_target(cm, &ab),
                &g.op(&cg_target(cm, a), &cg_target(cm, b)),
            ),
            w,
        );
        s_product.record(
            gdd_distance(
                g,
                &functor_s(cm, &ab),
                &gdd_mul(g, &functor_s(cm, a), &functor_s(cm, b)),
            ),
            w,
        );
        let unit = cg_identity(cm, &g.identity());
        let inv = cg_mul(cm, a, &cg_inverse(cm, a));
        let left_unit = cg_mul(cm, &unit, b);
        let r = cg_distance(cm, &inv, &unit).max(cg_distance(cm, &left_unit, b));
        semidirect.record(r, w);
    }
    for (k, (a, b)) in mor_pairs.iter().enumerate() {
        let c = &morphisms[k % morphisms.len()];
        let lhs = cg_mul(cm, &cg_mul(cm, a, b), c);
        let rhs = cg_mul(cm, a, &cg_mul(cm, b, c));
        semidirect.record(cg_distance(cm, &lhs, &rhs), || {
            format!(
                "a={}, b={}, c={}",
                label_mor(cm, a),
                label_mor(cm, b),
                label_mor(cm, c)
            )
        });
    }

    let mut associativity = Tally::new("compose_associativity", tol);
    let mut units = Tally::new("compose_identity", tol);
    let mut s_compose = Tally::new("functor_s_composition", tol);
    for (k, (m1, m2)) in composable.iter().enumerate() {
        let w = || format!("m1={}, m2={}", label_mor(cm, m1), label_mor(cm, m2));
        let m3 = CatGroupMorphism::new(hs.items[k % hs.items.len()].clone(), cg_target(cm, m2));
        let lhs = cg_compose(cm, &m3, m2).and_then(|x| cg_compose(cm, &x, m1));
        let rhs = cg_compose(cm, m2, m1).and_then(|x| cg_compose(cm, &m3, &x));
        let r = match (lhs, rhs) {
            (Ok(l), Ok(r)) => cg_distance(cm, &l, &r),
            _ => 1.0,
        };
        associativity.record(r, w);

        let left = cg_compose(cm, &cg_identity(cm, &cg_target(cm, m1)), m1);
        let right = cg_compose(cm, m1, &cg_identity(cm, &cg_source(cm, m1)));
        let r = match (left, right) {
            (Ok(l), Ok(r)) => cg_distance(cm, &l, m1).max(cg_distance(cm, &r, m1)),
            _ => 1.0,
        };
        units.record(r, w);

        let r = match cg_compose(cm, m2, m1) {
            Ok(c) => match gdd_compose(g, &functor_s(cm, m2), &functor_s(cm, m1)) {
                Ok(sc) => gdd_distance(g, &functor_s(cm, &c), &sc),
                Err(_) => 1.0,
            },
            Err(_) => 1.0,
        };
        s_compose.record(r, w);
    }

    ValidationReport {
        name: cm.name(),
        mode: mode_label(mode, exhaustive),
        axioms: vec![
            interchange.finish(),
            source_hom.finish(),
            target_hom.finish(),
            semidirect.finish(),
            associativity.finish(),
            units.finish(),
            s_compose.finish(),
            s_product.finish(),
        ],
    }
}
