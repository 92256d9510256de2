//! Multivalued mappings `T: R^n → CB(R^n)` with finite-set images, the
//! sampling domain they are certified on, and enumeration of approximate
//! fixed-point sets.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{affine_image, check_dims, point_set_distance_unchecked, FiniteSet, Point};

/// Default number of grid nodes per axis.
pub const DEFAULT_GRID: usize = 41;

/// Axis-aligned sampling box `[lo_i, hi_i]` with a uniform grid per axis.
///
/// Nodes are enumerated row-major with the first axis slowest, which is also
/// lexicographic order on the node coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainDoc", into = "DomainDoc")]
pub struct Domain {
    lo: Vec<f64>,
    hi: Vec<f64>,
    grid: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DomainDoc {
    lo: Vec<f64>,
    hi: Vec<f64>,
    grid: Vec<usize>,
}

impl TryFrom<DomainDoc> for Domain {
    type Error = Error;

    fn try_from(doc: DomainDoc) -> Result<Self> {
        Domain::new(doc.lo, doc.hi, doc.grid)
    }
}

impl From<Domain> for DomainDoc {
    fn from(d: Domain) -> Self {
        DomainDoc { lo: d.lo, hi: d.hi, grid: d.grid }
    }
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, grid: Vec<usize>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::ZeroDimension);
        }
        check_dims(lo.len(), hi.len())?;
        check_dims(lo.len(), grid.len())?;
        for axis in 0..lo.len() {
            let (l, h) = (lo[axis], hi[axis]);
            if !l.is_finite() || !h.is_finite() || l >= h {
                return Err(Error::InvalidMapping(format!(
                    "axis {axis}: need finite lo < hi, got [{l}, {h}]"
                )));
            }
            if grid[axis] < 2 {
                return Err(Error::InvalidMapping(format!("axis {axis}: grid needs at least 2 nodes")));
            }
        }
        Ok(Domain { lo, hi, grid })
    }

    /// The box `[lo, hi]^dim` with `nodes` grid nodes per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        Domain::new(vec![lo; dim], vec![hi; dim], vec![nodes; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.grid[axis] - 1) as f64
    }

    pub fn node_count(&self) -> usize {
        self.grid.iter().product()
    }

    fn axis_value(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.grid[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + i as f64 * self.spacing(axis)
        }
    }

    fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = linear % self.grid[axis];
            linear /= self.grid[axis];
        }
        idx
    }

    fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.grid).fold(0, |acc, (i, g)| acc * g + i)
    }

    fn node_at(&self, idx: &[usize]) -> Point {
        Point::new(idx.iter().enumerate().map(|(axis, &i)| self.axis_value(axis, i)).collect())
            .expect("grid nodes are finite")
    }

    pub fn node(&self, linear: usize) -> Point {
        self.node_at(&self.multi_index(linear))
    }

    /// All grid nodes in canonical order.
    pub fn nodes(&self) -> Vec<Point> {
        (0..self.node_count()).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim()
            && x.coords().iter().enumerate().all(|(axis, &c)| c >= self.lo[axis] && c <= self.hi[axis])
    }

    fn nearest_node_index(&self, x: &Point) -> Result<usize> {
        check_dims(self.dim(), x.dim())?;
        if !self.contains(x) {
            return Err(Error::OutOfDomain(x.coords().to_vec()));
        }
        let idx: Vec<usize> = x
            .coords()
            .iter()
            .enumerate()
            .map(|(axis, &c)| {
                let t = ((c - self.lo[axis]) / self.spacing(axis)).round();
                (t.max(0.0) as usize).min(self.grid[axis] - 1)
            })
            .collect();
        Ok(self.linear_index(&idx))
    }

    /// Grid nodes within Euclidean distance `radius` of `center`, in
    /// canonical order.
    pub fn nodes_in_ball(&self, center: &Point, radius: f64) -> Vec<Point> {
        if center.dim() != self.dim() || !(radius >= 0.0) {
            return Vec::new();
        }
        let mut ranges = Vec::with_capacity(self.dim());
        for (axis, &c) in center.coords().iter().enumerate() {
            let h = self.spacing(axis);
            let last = (self.grid[axis] - 1) as f64;
            let first = ((c - radius - self.lo[axis]) / h).ceil().max(0.0);
            let end = ((c + radius - self.lo[axis]) / h).floor().min(last);
            if first > end {
                return Vec::new();
            }
            ranges.push((first as usize, end as usize));
        }
        let mut out = Vec::new();
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            let node = self.node_at(&idx);
            if node.distance_unchecked(center) <= radius {
                out.push(node);
            }
            // odometer increment, last axis fastest
            let mut axis = self.dim();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if idx[axis] < ranges[axis].1 {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = ranges[axis].0;
            }
        }
    }

    fn clamp(&self, coords: &mut [f64]) {
        for (axis, c) in coords.iter_mut().enumerate() {
            *c = c.clamp(self.lo[axis], self.hi[axis]);
        }
    }

    pub fn scaled(&self, s: f64) -> Result<Domain> {
        let (mut lo, mut hi): (Vec<f64>, Vec<f64>) =
            self.lo.iter().zip(&self.hi).map(|(l, h)| (s * l, s * h)).unzip();
        if s < 0.0 {
            std::mem::swap(&mut lo, &mut hi);
        }
        Domain::new(lo, hi, self.grid.clone())
    }
}

/// One affine branch `x ↦ A x + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineBranch {
    #[serde(rename = "A")]
    pub matrix: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

impl AffineBranch {
    pub fn new(matrix: Vec<Vec<f64>>, c: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMapping(format!("branch matrix must be {n}x{n} to match offset")));
        }
        if matrix.iter().flatten().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMapping("non-finite branch entry".into()));
        }
        Ok(AffineBranch { matrix, c })
    }

    /// 1-D branch `x ↦ a x + c`.
    pub fn scalar(a: f64, c: f64) -> Self {
        AffineBranch { matrix: vec![vec![a]], c: vec![c] }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        check_dims(self.dim(), x.dim())?;
        Point::new(
            self.matrix
                .iter()
                .zip(&self.c)
                .map(|(row, c)| row.iter().zip(x.coords()).map(|(a, v)| a * v).sum::<f64>() + c)
                .collect(),
        )
    }
}

type SetRule = dyn Fn(&Point) -> Result<FiniteSet> + Send + Sync;

#[derive(Clone)]
enum Rule {
    Affine(Vec<AffineBranch>),
    Singleton(AffineBranch),
    Tabulated(Vec<FiniteSet>),
    Func { name: &'static str, f: Arc<SetRule> },
    Averaged { base: Arc<MultiMap>, lambda: f64 },
    Shifted { base: Arc<MultiMap>, b: f64 },
    Translated { base: Arc<MultiMap>, v: Point },
}

impl Rule {
    fn kind(&self) -> &'static str {
        match self {
            Rule::Affine(_) => "affine",
            Rule::Singleton(_) => "singleton",
            Rule::Tabulated(_) => "tabulated",
            Rule::Func { .. } => "function",
            Rule::Averaged { .. } => "averaged",
            Rule::Shifted { .. } => "shifted",
            Rule::Translated { .. } => "translated",
        }
    }
}

/// A multivalued mapping together with the box it is sampled on.
///
/// Cloning is cheap; composite maps share their base through `Arc`.
#[derive(Clone)]
pub struct MultiMap {
    rule: Rule,
    domain: Domain,
}

impl fmt::Debug for MultiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("MultiMap");
        s.field("kind", &self.rule.kind());
        match &self.rule {
            Rule::Affine(branches) => s.field("branches", branches),
            Rule::Singleton(branch) => s.field("branch", branch),
            Rule::Tabulated(table) => s.field("entries", &table.len()),
            Rule::Func { name, .. } => s.field("name", name),
            Rule::Averaged { base, lambda } => s.field("base", base).field("lambda", lambda),
            Rule::Shifted { base, b } => s.field("base", base).field("b", b),
            Rule::Translated { base, v } => s.field("base", base).field("v", v),
        };
        s.field("domain", &self.domain).finish()
    }
}

impl MultiMap {
    /// `Tx = { A_i x + c_i }` over all branches.
    pub fn affine(branches: Vec<AffineBranch>, domain: Domain) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidMapping("affine map needs at least one branch".into()));
        }
        for br in &branches {
            let br = AffineBranch::new(br.matrix.clone(), br.c.clone())?;
            check_dims(domain.dim(), br.dim())?;
        }
        Ok(MultiMap { rule: Rule::Affine(branches), domain })
    }

    /// Single-valued affine rule wrapped as one-point images.
    pub fn singleton(branch: AffineBranch, domain: Domain) -> Result<Self> {
        let branch = AffineBranch::new(branch.matrix, branch.c)?;
        check_dims(domain.dim(), branch.dim())?;
        Ok(MultiMap { rule: Rule::Singleton(branch), domain })
    }

    /// Explicit table: one image set per grid node, in node order. Points
    /// off the grid use the nearest node's entry.
    pub fn tabulated(table: Vec<FiniteSet>, domain: Domain) -> Result<Self> {
        if table.len() != domain.node_count() {
            return Err(Error::InvalidMapping(format!(
                "table has {} entries, domain has {} grid nodes",
                table.len(),
                domain.node_count()
            )));
        }
        for entry in &table {
            check_dims(domain.dim(), entry.dim())?;
        }
        Ok(MultiMap { rule: Rule::Tabulated(table), domain })
    }

    /// Arbitrary set-valued rule. Not serializable.
    pub fn from_fn<F>(name: &'static str, domain: Domain, f: F) -> Self
    where
        F: Fn(&Point) -> Result<FiniteSet> + Send + Sync + 'static,
    {
        MultiMap { rule: Rule::Func { name, f: Arc::new(f) }, domain }
    }

    /// Arbitrary single-valued rule wrapped as one-point images.
    pub fn from_point_fn<F>(name: &'static str, domain: Domain, f: F) -> Self
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        MultiMap::from_fn(name, domain, move |x| Ok(FiniteSet::singleton(f(x)?)))
    }

    pub fn identity(domain: Domain) -> Self {
        let n = domain.dim();
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        MultiMap { rule: Rule::Singleton(AffineBranch { matrix, c: vec![0.0; n] }), domain }
    }

    /// `x ↦ { u + v : u ∈ Tx }`. Affine, singleton and tabulated maps stay
    /// in their own kind, so the result remains serializable.
    pub fn translated(&self, v: Point) -> Result<Self> {
        check_dims(self.dim(), v.dim())?;
        let shift = |br: &AffineBranch| AffineBranch {
            matrix: br.matrix.clone(),
            c: br.c.iter().zip(v.coords()).map(|(c, v)| c + v).collect(),
        };
        let rule = match &self.rule {
            Rule::Affine(branches) => Rule::Affine(branches.iter().map(shift).collect()),
            Rule::Singleton(branch) => Rule::Singleton(shift(branch)),
            Rule::Tabulated(table) => {
                Rule::Tabulated(table.iter().map(|s| affine_image(s, 1.0, &v)).collect::<Result<_>>()?)
            }
            _ => Rule::Translated { base: Arc::new(self.clone()), v },
        };
        Ok(MultiMap { rule, domain: self.domain.clone() })
    }

    pub(crate) fn averaged_unchecked(&self, lambda: f64) -> Self {
        MultiMap {
            rule: Rule::Averaged { base: Arc::new(self.clone()), lambda },
            domain: self.domain.clone(),
        }
    }

    pub(crate) fn shifted_unchecked(&self, b: f64) -> Self {
        MultiMap { rule: Rule::Shifted { base: Arc::new(self.clone()), b }, domain: self.domain.clone() }
    }

    /// Same rule sampled on a different box.
    pub fn with_domain(&self, domain: Domain) -> Result<Self> {
        check_dims(self.dim(), domain.dim())?;
        if let Rule::Tabulated(_) = self.rule {
            return Err(Error::InvalidMapping("a tabulated map is tied to its grid".into()));
        }
        Ok(MultiMap { rule: self.rule.clone(), domain })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn kind(&self) -> &'static str {
        self.rule.kind()
    }

    /// The image set `Tx`, canonicalized.
    pub fn evaluate(&self, x: &Point) -> Result<FiniteSet> {
        check_dims(self.dim(), x.dim())?;
        match &self.rule {
            Rule::Affine(branches) => {
                FiniteSet::new(branches.iter().map(|br| br.apply(x)).collect::<Result<_>>()?)
            }
            Rule::Singleton(branch) => Ok(FiniteSet::singleton(branch.apply(x)?)),
            Rule::Tabulated(table) => {
                let idx = self.domain.nearest_node_index(x)?;
                Ok(table[idx].clone())
            }
            Rule::Func { f, .. } => {
                let image = f(x)?;
                check_dims(self.dim(), image.dim())?;
                Ok(image)
            }
            Rule::Averaged { base, lambda } => {
                let image = base.evaluate(x)?;
                affine_image(&image, *lambda, &x.scale(1.0 - lambda)?)
            }
            Rule::Shifted { base, b } => {
                let image = base.evaluate(x)?;
                affine_image(&image, 1.0, &x.scale(*b)?)
            }
            Rule::Translated { base, v } => affine_image(&base.evaluate(x)?, 1.0, v),
        }
    }

    /// `d(x, Tx)`; zero exactly when `x ∈ Tx`.
    pub fn residual(&self, x: &Point) -> Result<f64> {
        let image = self.evaluate(x)?;
        Ok(point_set_distance_unchecked(x, &image))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MappingDoc = serde_json::from_str(text)?;
        MultiMap::try_from(doc)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = MappingDoc::try_from(self)?;
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// Free-function form of [`MultiMap::evaluate`].
pub fn evaluate(map: &MultiMap, x: &Point) -> Result<FiniteSet> {
    map.evaluate(x)
}

/// Free-function form of [`MultiMap::residual`].
pub fn residual(map: &MultiMap, x: &Point) -> Result<f64> {
    map.residual(x)
}

/// JSON document describing a mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingDoc {
    pub kind: MappingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<AffineBranch>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<FiniteSet>>,
    pub domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingKind {
    Affine,
    Singleton,
    Tabulated,
}

impl TryFrom<MappingDoc> for MultiMap {
    type Error = Error;

    fn try_from(doc: MappingDoc) -> Result<Self> {
        let missing = |field: &str| Error::InvalidMapping(format!("missing field `{field}`"));
        match doc.kind {
            MappingKind::Affine => {
                MultiMap::affine(doc.branches.ok_or_else(|| missing("branches"))?, doc.domain)
            }
            MappingKind::Singleton => {
                let mut branches = doc.branches.ok_or_else(|| missing("branches"))?;
                if branches.len() != 1 {
                    return Err(Error::InvalidMapping("singleton map takes exactly one branch".into()));
                }
                MultiMap::singleton(branches.remove(0), doc.domain)
            }
            MappingKind::Tabulated => {
                MultiMap::tabulated(doc.table.ok_or_else(|| missing("table"))?, doc.domain)
            }
        }
    }
}

impl TryFrom<&MultiMap> for MappingDoc {
    type Error = Error;

    fn try_from(map: &MultiMap) -> Result<Self> {
        let domain = map.domain.clone();
        match &map.rule {
            Rule::Affine(branches) => Ok(MappingDoc {
                kind: MappingKind::Affine,
                branches: Some(branches.clone()),
                table: None,
                domain,
            }),
            Rule::Singleton(branch) => Ok(MappingDoc {
                kind: MappingKind::Singleton,
                branches: Some(vec![branch.clone()]),
                table: None,
                domain,
            }),
            Rule::Tabulated(table) => Ok(MappingDoc {
                kind: MappingKind::Tabulated,
                branches: None,
                table: Some(table.clone()),
                domain,
            }),
            other => Err(Error::NotSerializable(other.kind())),
        }
    }
}

/// Approximate fixed-point set `F(T)` on the map's sampling box.
///
/// Grid nodes that are within `eps` of being fixed, or that are local minima
/// of the residual over their grid neighbourhood, seed a pattern search that
/// shrinks the step from one grid cell until the residual drops to `eps/10`
/// or the step falls below `eps/100`. Seeds ending with residual `≤ eps` are
/// kept; points within `eps` of each other collapse onto the one with the
/// smallest residual. `Ok(None)` means no fixed point was found.
pub fn fixed_point_set(map: &MultiMap, eps: f64) -> Result<Option<FiniteSet>> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let domain = map.domain();
    let n = domain.dim();
    let count = domain.node_count();
    let residuals: Vec<f64> = (0..count).map(|i| map.residual(&domain.node(i))).collect::<Result<_>>()?;

    let offsets = neighbour_offsets(n);
    let mut found: Vec<(f64, Point)> = Vec::new();
    for linear in 0..count {
        let r = residuals[linear];
        let is_seed = r <= eps || {
            let idx = domain.multi_index(linear);
            offsets.iter().all(|off| match shifted_index(domain, &idx, off) {
                Some(j) => r <= residuals[domain.linear_index(&j)],
                None => true,
            })
        };
        if !is_seed {
            continue;
        }
        let (x, rx) = refine(map, domain.node(linear), r, eps)?;
        if rx <= eps {
            found.push((rx, x));
        }
    }

    found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.lex_cmp(&b.1)));
    let mut kept: Vec<Point> = Vec::new();
    for (_, x) in found {
        if kept.iter().all(|k| k.distance_unchecked(&x) > eps) {
            kept.push(x);
        }
    }
    if kept.is_empty() {
        Ok(None)
    } else {
        FiniteSet::new(kept).map(Some)
    }
}

const REFINE_MAX_STEPS: usize = 10_000;

fn refine(map: &MultiMap, start: Point, r0: f64, eps: f64) -> Result<(Point, f64)> {
    let domain = map.domain();
    let n = domain.dim();
    let mut steps: Vec<f64> = (0..n).map(|axis| domain.spacing(axis)).collect();
    let offsets = neighbour_offsets(n);
    let (mut x, mut rx) = (start, r0);
    for _ in 0..REFINE_MAX_STEPS {
        if rx <= eps / 10.0 || steps.iter().all(|&h| h < eps / 100.0) {
            break;
        }
        let mut best: Option<(Point, f64)> = None;
        for off in &offsets {
            let mut coords: Vec<f64> =
                x.coords().iter().zip(off).zip(&steps).map(|((c, &o), h)| c + o as f64 * h).collect();
            domain.clamp(&mut coords);
            let y = Point::new(coords)?;
            let ry = map.residual(&y)?;
            if ry < best.as_ref().map_or(rx, |b| b.1) {
                best = Some((y, ry));
            }
        }
        match best {
            Some((y, ry)) => {
                x = y;
                rx = ry;
            }
            None => steps.iter_mut().for_each(|h| *h *= 0.5),
        }
    }
    Ok((x, rx))
}

/// All offsets in `{-1, 0, 1}^n` except the zero vector, in lexicographic order.
fn neighbour_offsets(n: usize) -> Vec<Vec<i32>> {
    let total = 3usize.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut off = vec![0i32; n];
            for axis in (0..n).rev() {
                off[axis] = (k % 3) as i32 - 1;
                k /= 3;
            }
            off
        })
        .filter(|off| off.iter().any(|&o| o != 0))
        .collect()
}

fn shifted_index(domain: &Domain, idx: &[usize], off: &[i32]) -> Option<Vec<usize>> {
    idx.iter()
        .zip(off)
        .zip(domain.grid())
        .map(|((&i, &o), &g)| {
            let j = i as i64 + o as i64;
            (j >= 0 && j < g as i64).then_some(j as usize)
        })
        .collect()
}

/// Concrete mappings used by tests, examples and the CLI.
pub mod builtins {
    use super::*;

    fn line(lo: f64, hi: f64) -> Domain {
        Domain::cube(1, lo, hi, DEFAULT_GRID).expect("valid box")
    }

    fn square(lo: f64, hi: f64) -> Domain {
        Domain::cube(2, lo, hi, DEFAULT_GRID).expect("valid box")
    }

    /// `Tx = {a·x + c}` on `[-4, 4]`.
    pub fn scalar_affine(a: f64, c: f64) -> MultiMap {
        MultiMap::affine(vec![AffineBranch::scalar(a, c)], line(-4.0, 4.0)).expect("valid branch")
    }

    /// `Tx = {x/2}` on `[-4, 4]`; unique fixed point 0.
    pub fn halving() -> MultiMap {
        scalar_affine(0.5, 0.0)
    }

    /// `Tx = {−x}` on `[-4, 4]`; not a contraction, but `T_½ ≡ {0}`.
    pub fn negation() -> MultiMap {
        scalar_affine(-1.0, 0.0)
    }

    /// `Tx = {x/2, −x/2}` on `[-4, 4]`; end point 0.
    pub fn split_halving() -> MultiMap {
        MultiMap::affine(
            vec![AffineBranch::scalar(0.5, 0.0), AffineBranch::scalar(-0.5, 0.0)],
            line(-4.0, 4.0),
        )
        .expect("valid branches")
    }

    /// `Tx = {x/2 + 1, x/2 − 1}` on `[-4, 4]`; fixed points ±2.
    pub fn twin_branches() -> MultiMap {
        MultiMap::affine(
            vec![AffineBranch::scalar(0.5, 1.0), AffineBranch::scalar(0.5, -1.0)],
            line(-4.0, 4.0),
        )
        .expect("valid branches")
    }

    /// Quarter-turn contraction `Tx = {R x + c}` on `[-1, 1]^2`, `R` a
    /// rotation by 90° scaled by ½.
    pub fn planar_rotation() -> MultiMap {
        MultiMap::affine(
            vec![AffineBranch::new(vec![vec![0.0, -0.5], vec![0.5, 0.0]], vec![0.2, 0.1]).expect("2x2")],
            square(-1.0, 1.0),
        )
        .expect("valid branch")
    }

    /// Spiral `Tx = {S x}` on `[-1, 1]^2` with `S = [[-0.5, -0.3], [0.3, -0.5]]`;
    /// every shift `cx + Sx` keeps a rotational part of norm 0.3.
    pub fn planar_spiral() -> MultiMap {
        MultiMap::affine(
            vec![AffineBranch::new(vec![vec![-0.5, -0.3], vec![0.3, -0.5]], vec![0.0, 0.0]).expect("2x2")],
            square(-1.0, 1.0),
        )
        .expect("valid branch")
    }

    /// `Tx = {−x/2 + c}` on `[-1, 1]^2`. With `b = 1` the averaged map is
    /// `x ↦ x/4 + c/2`, a Kannan map with constant 1/3.
    pub fn planar_reflection(c: [f64; 2]) -> MultiMap {
        MultiMap::affine(
            vec![AffineBranch::new(vec![vec![-0.5, 0.0], vec![0.0, -0.5]], c.to_vec()).expect("2x2")],
            square(-1.0, 1.0),
        )
        .expect("valid branch")
    }

    /// Named catalog of maps that each have at least one fixed point inside
    /// their box.
    pub fn catalog() -> Vec<(&'static str, MultiMap)> {
        vec![
            ("halving", halving()),
            ("negation", negation()),
            ("split-halving", split_halving()),
            ("twin-branches", twin_branches()),
            ("planar-rotation", planar_rotation()),
            ("planar-reflection", planar_reflection([0.3, -0.15])),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::builtins::*;
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn set(rows: &[&[f64]]) -> FiniteSet {
        FiniteSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(negation().evaluate(&p(&[2.0])).unwrap(), set(&[&[-2.0]]));
        let id = MultiMap::identity(Domain::cube(1, -10.0, 10.0, 3).unwrap());
        assert_eq!(id.evaluate(&p(&[5.0])).unwrap(), set(&[&[5.0]]));
        let two = MultiMap::affine(
            vec![AffineBranch::scalar(0.5, 0.0), AffineBranch::scalar(-0.5, 0.0)],
            Domain::cube(1, -4.0, 4.0, 9).unwrap(),
        )
        .unwrap();
        assert_eq!(two.evaluate(&p(&[4.0])).unwrap(), set(&[&[-2.0], &[2.0]]));
    }

    #[test]
    fn residual_examples() {
        assert_eq!(negation().residual(&p(&[2.0])).unwrap(), 4.0);
        let id = MultiMap::identity(Domain::cube(1, -1.0, 1.0, 3).unwrap());
        assert_eq!(id.residual(&p(&[0.7])).unwrap(), 0.0);
        assert_eq!(halving().residual(&p(&[8.0])).unwrap(), 4.0);
    }

    #[test]
    fn tabulated_lookup_and_domain_errors() {
        let domain = Domain::cube(1, 0.0, 2.0, 3).unwrap();
        let table = vec![set(&[&[1.0]]), set(&[&[1.0], &[2.0]]), set(&[&[0.0]])];
        let t = MultiMap::tabulated(table, domain.clone()).unwrap();
        assert_eq!(t.evaluate(&p(&[0.4])).unwrap(), set(&[&[1.0]]));
        assert_eq!(t.evaluate(&p(&[1.2])).unwrap(), set(&[&[1.0], &[2.0]]));
        let err = t.evaluate(&p(&[2.5])).unwrap_err();
        assert!(err.to_string().contains("out of domain"));
        assert!(MultiMap::tabulated(vec![set(&[&[0.0]])], domain).is_err());
    }

    #[test]
    fn affine_validation() {
        let d = Domain::cube(1, -1.0, 1.0, 3).unwrap();
        assert!(MultiMap::affine(vec![], d.clone()).is_err());
        let bad = AffineBranch { matrix: vec![vec![1.0, 0.0]], c: vec![0.0] };
        assert!(MultiMap::affine(vec![bad], d).is_err());
        assert!(Domain::new(vec![1.0], vec![0.0], vec![3]).is_err());
        assert!(Domain::new(vec![0.0], vec![1.0], vec![1]).is_err());
    }

    #[test]
    fn grid_nodes_are_canonical_and_exact_at_ends() {
        let d = Domain::new(vec![-1.0, 0.0], vec![1.0, 3.0], vec![3, 4]).unwrap();
        let nodes = d.nodes();
        assert_eq!(nodes.len(), 12);
        assert!(nodes.windows(2).all(|w| w[0].lex_cmp(&w[1]).is_lt()));
        assert_eq!(nodes.last().unwrap(), &p(&[1.0, 3.0]));
        let ball = d.nodes_in_ball(&p(&[0.0, 1.0]), 1.0);
        assert_eq!(
            ball,
            vec![p(&[-1.0, 1.0]), p(&[0.0, 0.0]), p(&[0.0, 1.0]), p(&[0.0, 2.0]), p(&[1.0, 1.0])]
        );
    }

    #[test]
    fn fixed_point_set_examples() {
        let f = fixed_point_set(&halving(), 1e-6).unwrap().unwrap();
        assert_eq!(f.len(), 1);
        assert!(f.points()[0].norm() <= 1e-6);

        let id = MultiMap::identity(Domain::cube(1, -1.0, 1.0, 3).unwrap());
        assert_eq!(fixed_point_set(&id, 1e-6).unwrap().unwrap(), set(&[&[-1.0], &[0.0], &[1.0]]));

        assert!(fixed_point_set(&scalar_affine(1.0, 1.0), 1e-6).unwrap().is_none());
        assert!(fixed_point_set(&halving(), 0.0).is_err());
    }

    #[test]
    fn fixed_point_set_finds_every_branch_fixed_point() {
        let f = fixed_point_set(&twin_branches(), 1e-6).unwrap().unwrap();
        assert_eq!(f.len(), 2);
        assert!((f.points()[0].coords()[0] + 2.0).abs() <= 1e-6);
        assert!((f.points()[1].coords()[0] - 2.0).abs() <= 1e-6);

        // (I - R) p = c for the quarter-turn map
        let f = fixed_point_set(&planar_rotation(), 1e-6).unwrap().unwrap();
        assert_eq!(f.len(), 1);
        let expected = p(&[0.12, 0.16]);
        assert!(f.points()[0].distance(&expected).unwrap() <= 1e-6);
    }

    #[test]
    fn mapping_json_round_trip() {
        let text = r#"{"kind":"affine","branches":[{"A":[[0.5]],"c":[0]},{"A":[[-0.5]],"c":[0]}],
                      "domain":{"lo":[-4],"hi":[4],"grid":[41]}}"#;
        let t = MultiMap::from_json(text).unwrap();
        assert_eq!(t.evaluate(&p(&[4.0])).unwrap(), set(&[&[-2.0], &[2.0]]));
        let again = MultiMap::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(MappingDoc::try_from(&again).unwrap(), MappingDoc::try_from(&t).unwrap());
        let single = r#"{"kind":"singleton","branches":[{"A":[[1]],"c":[0]},{"A":[[1]],"c":[1]}],
                        "domain":{"lo":[-1],"hi":[1],"grid":[3]}}"#;
        assert!(MultiMap::from_json(single).is_err());
        assert!(
            MultiMap::from_json(r#"{"kind":"tabulated","domain":{"lo":[0],"hi":[1],"grid":[2]}}"#).is_err()
        );
        let moved =
            MultiMap::from_json(&halving().translated(p(&[1.0])).unwrap().to_json().unwrap()).unwrap();
        assert_eq!(moved.evaluate(&p(&[2.0])).unwrap(), set(&[&[2.0]]));
        assert!(halving().averaged_unchecked(0.5).to_json().is_err());
    }
}
