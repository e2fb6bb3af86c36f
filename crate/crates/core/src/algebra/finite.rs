//! Finite groups given by multiplication tables, and finite crossed modules.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{CrossedModule, Group};
use crate::error::{Error, Result};

/// On-disk format of a finite group: `table[a][b]` is the index of `a * b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGroupSpec {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default)]
    pub labels: Vec<String>,
}

/// A finite group stored as a multiplication table over `0..order`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<usize>>,
    labels: Vec<String>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Builds a group from its table, checking closure, associativity,
    /// identity and inverses exhaustively.
    pub fn from_table(name: &str, table: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Fixture("empty multiplication table".into()));
        }
        if table
            .iter()
            .any(|row| row.len() != n || row.iter().any(|&x| x >= n))
        {
            return Err(Error::Fixture(format!(
                "table of '{name}' is not an n x n table over 0..{n}"
            )));
        }
        let labels = if labels.is_empty() {
            (0..n).map(|i| i.to_string()).collect()
        } else if labels.len() == n {
            labels
        } else {
            return Err(Error::Fixture(format!(
                "'{name}' has {} labels for order {n}",
                labels.len()
            )));
        };
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::Fixture(format!("'{name}' has no identity element")))?;
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| {
                    Error::Fixture(format!("element {} of '{name}' has no inverse", labels[a]))
                })?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Fixture(format!(
                            "'{name}' is not associative at ({}, {}, {})",
                            labels[a], labels[b], labels[c]
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            name: name.to_string(),
            table,
            labels,
            identity,
            inverses,
        })
    }

    pub fn from_spec(name: &str, spec: &FiniteGroupSpec) -> Result<Self> {
        if spec.order != spec.table.len() {
            return Err(Error::Fixture(format!(
                "'{name}' declares order {} but the table has {} rows",
                spec.order,
                spec.table.len()
            )));
        }
        Self::from_table(name, spec.table.clone(), spec.labels.clone())
    }

    pub fn from_json(name: &str, text: &str) -> Result<Self> {
        let spec: FiniteGroupSpec = serde_json::from_str(text)?;
        Self::from_spec(name, &spec)
    }

    pub fn to_spec(&self) -> FiniteGroupSpec {
        FiniteGroupSpec {
            order: self.order(),
            table: self.table.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Builds the group generated by closing a set of labelled permutations
    /// under composition. Permutations compose right to left:
    /// `(a * b)(x) = a(b(x))`. Every product must already be in the list.
    pub fn from_permutations(name: &str, perms: &[(&str, Vec<usize>)]) -> Result<Self> {
        let compose = |a: &[usize], b: &[usize]| b.iter().map(|&x| a[x]).collect::<Vec<_>>();
        let index = |p: &[usize]| perms.iter().position(|(_, q)| q.as_slice() == p);
        let mut table = vec![vec![0; perms.len()]; perms.len()];
        for (i, (_, a)) in perms.iter().enumerate() {
            for (j, (_, b)) in perms.iter().enumerate() {
                table[i][j] = index(&compose(a, b)).ok_or_else(|| {
                    Error::Fixture(format!("permutations of '{name}' are not closed"))
                })?;
            }
        }
        let labels = perms.iter().map(|(l, _)| l.to_string()).collect();
        Self::from_table(name, table, labels)
    }

    fn s3_perms() -> Vec<(&'static str, Vec<usize>)> {
        vec![
            ("e", vec![0, 1, 2]),
            ("(12)", vec![1, 0, 2]),
            ("(13)", vec![2, 1, 0]),
            ("(23)", vec![0, 2, 1]),
            ("(123)", vec![1, 2, 0]),
            ("(132)", vec![2, 0, 1]),
        ]
    }

    /// The symmetric group on three letters.
    pub fn s3() -> Self {
        Self::from_permutations("S3", &Self::s3_perms()).expect("S3 table is valid")
    }

    /// The alternating group on three letters, labelled by its 3-cycles.
    pub fn a3() -> Self {
        let perms: Vec<_> = Self::s3_perms()
            .into_iter()
            .filter(|(l, _)| matches!(*l, "e" | "(123)" | "(132)"))
            .collect();
        Self::from_permutations("A3", &perms).expect("A3 table is valid")
    }

    /// The dihedral group of the square, as permutations of its vertices.
    pub fn d4() -> Self {
        let r = [1usize, 2, 3, 0];
        let s = [0usize, 3, 2, 1];
        let compose = |a: &[usize], b: &[usize]| b.iter().map(|&x| a[x]).collect::<Vec<_>>();
        let mut rot = vec![vec![0, 1, 2, 3]];
        for k in 1..4 {
            let next = compose(&r, &rot[k - 1]);
            rot.push(next);
        }
        let labels = ["e", "r", "r2", "r3", "s", "sr", "sr2", "sr3"];
        let mut perms = Vec::new();
        for (k, p) in rot.iter().enumerate() {
            perms.push((labels[k], p.clone()));
        }
        for (k, p) in rot.iter().enumerate() {
            perms.push((labels[4 + k], compose(&s, p)));
        }
        Self::from_permutations("D4", &perms).expect("D4 table is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    pub fn label_of(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

impl Group for FiniteGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        self.identity
    }

    fn op(&self, a: &usize, b: &usize) -> usize {
        self.table[*a][*b]
    }

    fn inv(&self, a: &usize) -> usize {
        self.inverses[*a]
    }

    fn dist(&self, a: &usize, b: &usize) -> f64 {
        if a == b {
            0.0
        } else {
            1.0
        }
    }

    fn tolerance(&self) -> f64 {
        0.0
    }

    fn enumerate(&self) -> Option<Vec<usize>> {
        Some((0..self.order()).collect())
    }

    fn draw(&self, rng: &mut dyn RngCore) -> usize {
        rng.gen_range(0..self.order())
    }

    fn label(&self, a: &usize) -> String {
        self.labels[*a].clone()
    }
}

/// On-disk format of a finite crossed module. `alpha[g][h]` is the index of
/// `alpha_g(h)` and `tau[h]` the index of `tau(h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteCrossedModuleSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub g: FiniteGroupSpec,
    pub h: FiniteGroupSpec,
    pub tau: Vec<usize>,
    pub alpha: Vec<Vec<usize>>,
}

/// A crossed module of finite groups stored as lookup tables.
#[derive(Debug, Clone)]
pub struct FiniteCrossedModule {
    name: String,
    g: FiniteGroup,
    h: FiniteGroup,
    tau: Vec<usize>,
    alpha: Vec<Vec<usize>>,
}

impl FiniteCrossedModule {
    /// Checks only that the maps are total; the axioms are left to
    /// [`super::validate_crossed_module`].
    pub fn new(
        name: &str,
        g: FiniteGroup,
        h: FiniteGroup,
        tau: Vec<usize>,
        alpha: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if tau.len() != h.order() || tau.iter().any(|&x| x >= g.order()) {
            return Err(Error::Fixture(format!(
                "tau of '{name}' is not a map H -> G"
            )));
        }
        if alpha.len() != g.order()
            || alpha
                .iter()
                .any(|row| row.len() != h.order() || row.iter().any(|&x| x >= h.order()))
        {
            return Err(Error::Fixture(format!(
                "alpha of '{name}' is not a map G x H -> H"
            )));
        }
        Ok(FiniteCrossedModule {
            name: name.to_string(),
            g,
            h,
            tau,
            alpha,
        })
    }

    pub fn from_spec(spec: &FiniteCrossedModuleSpec) -> Result<Self> {
        let name = spec
            .name
            .clone()
            .unwrap_or_else(|| "finite crossed module".into());
        let g = FiniteGroup::from_spec("G", &spec.g)?;
        let h = FiniteGroup::from_spec("H", &spec.h)?;
        Self::new(&name, g, h, spec.tau.clone(), spec.alpha.clone())
    }

    pub fn to_spec(&self) -> FiniteCrossedModuleSpec {
        FiniteCrossedModuleSpec {
            name: Some(self.name.clone()),
            g: self.g.to_spec(),
            h: self.h.to_spec(),
            tau: self.tau.clone(),
            alpha: self.alpha.clone(),
        }
    }

    /// `(G, G, id, conjugation)`.
    pub fn inner(g: FiniteGroup) -> Self {
        let n = g.order();
        let alpha = (0..n)
            .map(|a| (0..n).map(|b| g.mul(g.mul(a, b), g.inverse(a))).collect())
            .collect();
        let name = format!("inner {}", g.name());
        Self::new(&name, g.clone(), g, (0..n).collect(), alpha)
            .expect("inner module is well formed")
    }

    fn s3_a3_with(name: &str, conjugate: bool) -> Self {
        let g = FiniteGroup::s3();
        let h = FiniteGroup::a3();
        let tau: Vec<usize> = h
            .labels()
            .iter()
            .map(|l| g.index_of(l).expect("A3 labels are S3 labels"))
            .collect();
        let alpha = (0..g.order())
            .map(|a| {
                (0..h.order())
                    .map(|b| {
                        if conjugate {
                            let image = g.mul(g.mul(a, tau[b]), g.inverse(a));
                            tau.iter()
                                .position(|&t| t == image)
                                .expect("A3 is normal in S3")
                        } else {
                            b
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(name, g, h, tau, alpha).expect("S3/A3 module is well formed")
    }

    /// `(S3, A3, inclusion, conjugation)`.
    pub fn s3_a3() -> Self {
        Self::s3_a3_with("S3/A3 conjugation", true)
    }

    /// `(S3, A3, inclusion, trivial action)`: not a crossed module, used as a
    /// negative control.
    pub fn s3_a3_trivial_action() -> Self {
        Self::s3_a3_with("S3/A3 trivial action", false)
    }

    /// `(D4, D4, id, conjugation)`.
    pub fn inner_d4() -> Self {
        Self::inner(FiniteGroup::d4())
    }

    pub fn g(&self) -> &FiniteGroup {
        &self.g
    }

    pub fn h(&self) -> &FiniteGroup {
        &self.h
    }
}

impl CrossedModule for FiniteCrossedModule {
    type G = FiniteGroup;
    type H = FiniteGroup;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn g_group(&self) -> &FiniteGroup {
        &self.g
    }

    fn h_group(&self) -> &FiniteGroup {
        &self.h
    }

    fn tau(&self, h: &usize) -> usize {
        self.tau[*h]
    }

    fn alpha(&self, g: &usize, h: &usize) -> usize {
        self.alpha[*g][*h]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent permutation arithmetic on label strings.
    fn perm_of(label: &str) -> [usize; 3] {
        match label {
            "e" => [0, 1, 2],
            "(12)" => [1, 0, 2],
            "(13)" => [2, 1, 0],
            "(23)" => [0, 2, 1],
            "(123)" => [1, 2, 0],
            "(132)" => [2, 0, 1],
            _ => panic!("unknown label {label}"),
        }
    }

    #[test]
    fn s3_table_matches_permutation_composition() {
        let g = FiniteGroup::s3();
        for a in 0..6 {
            for b in 0..6 {
                let pa = perm_of(g.label_of(a));
                let pb = perm_of(g.label_of(b));
                let prod = [pa[pb[0]], pa[pb[1]], pa[pb[2]]];
                assert_eq!(perm_of(g.label_of(g.mul(a, b))), prod);
            }
        }
    }

    #[test]
    fn three_cycle_times_transposition() {
        let g = FiniteGroup::s3();
        let c = g.index_of("(123)").unwrap();
        let t = g.index_of("(12)").unwrap();
        assert_eq!(g.label_of(g.mul(c, t)), "(13)");
    }

    #[test]
    fn d4_has_the_expected_shape() {
        let g = FiniteGroup::d4();
        assert_eq!(g.order(), 8);
        let r = g.index_of("r").unwrap();
        let s = g.index_of("s").unwrap();
        assert_eq!(g.mul(s, s), g.identity_index());
        assert_eq!(g.mul(g.mul(s, r), s), g.inverse(r));
        let centre: Vec<_> = (0..8)
            .filter(|&z| (0..8).all(|a| g.mul(z, a) == g.mul(a, z)))
            .map(|z| g.label_of(z).to_string())
            .collect();
        assert_eq!(centre, vec!["e", "r2"]);
    }

    #[test]
    fn json_round_trip() {
        let g = FiniteGroup::s3();
        let text = serde_json::to_string(&g.to_spec()).unwrap();
        let back = FiniteGroup::from_json("S3", &text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_non_groups() {
        let not_assoc = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 0, 0]];
        assert!(FiniteGroup::from_table("bad", not_assoc, vec![]).is_err());
        let spec = FiniteGroupSpec {
            order: 3,
            table: vec![vec![0, 1], vec![1, 0]],
            labels: vec![],
        };
        assert!(FiniteGroup::from_spec("bad", &spec).is_err());
    }

    #[test]
    fn crossed_module_maps_must_be_total() {
        let g = FiniteGroup::s3();
        let h = FiniteGroup::a3();
        assert!(FiniteCrossedModule::new("bad", g, h, vec![0, 1], vec![vec![0, 1, 2]; 6]).is_err());
    }
}
