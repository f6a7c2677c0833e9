//! JSON formats for polytopes, tuples, result manifests and checkpoints,
//! atomic file output, and verification of manifests against the reference
//! counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classification::{exceptional_triples, type_counts, ClassRecord, LevelProgress, LevelStore, Mode};
use crate::equivalence::{affine_key, tuple_canonical_key, CanonicalForm};
use crate::error::{input, internal, Error, Result};
use crate::lattice::IntVector;
use crate::maximality::is_r_maximal_in;
use crate::mixed::{mixed_volume, PolytopeTuple};
use crate::polytope::{hull, minkowski_sum, LatticePolytope};
use crate::sandwich::FactoryState;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Number of maximal pairs of lattice polygons with mixed volume `m = 1..=10`.
pub const N2: [usize; 10] = [1, 3, 6, 13, 18, 38, 46, 87, 118, 202];
/// Number of maximal irreducible triples in `R^3` with mixed volume `m = 1..=4`.
pub const N3: [usize; 4] = [1, 7, 21, 92];
/// Number of those triples whose members are all three-dimensional.
pub const N3_FULL_DIM: [usize; 4] = [1, 4, 10, 30];
/// Full-dimensional maximal triples per structural type (rows) and mixed
/// volume `m = 1..=4` (columns).
pub const TYPE_TABLE: [[usize; 4]; 5] = [[1, 3, 6, 17], [0, 1, 1, 5], [0, 0, 1, 3], [0, 0, 1, 3], [0, 0, 1, 2]];

fn at(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("at {path}: {msg}"))
}

/// Reads and parses a JSON file; unreadable or malformed files are input errors.
pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("malformed JSON in {}: {e}", path.display())))
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    {
        use std::io::Write;
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Deserializes with the JSON path of the first schema violation in the error.
pub fn from_value_at<T: DeserializeOwned>(v: &Value, path: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let p = e.path().to_string();
        let p = if p == "." { path.to_string() } else { format!("{path}.{p}") };
        at(&p, e.into_inner())
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub vertices: Vec<Vec<i64>>,
}

impl PolytopeJson {
    pub fn from_polytope(p: &LatticePolytope) -> Self {
        let mut vs: Vec<Vec<i64>> = p.vertices().iter().map(|v| v.as_slice().to_vec()).collect();
        vs.sort();
        PolytopeJson { vertices: vs }
    }

    pub fn to_polytope(&self, path: &str) -> Result<LatticePolytope> {
        if self.vertices.is_empty() {
            return Err(at(&format!("{path}.vertices"), "a polytope needs at least one vertex"));
        }
        let d = self.vertices[0].len();
        if !(1..=3).contains(&d) {
            return Err(at(&format!("{path}.vertices[0]"), format!("expected 1 to 3 coordinates, found {d}")));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.len() != d {
                return Err(at(
                    &format!("{path}.vertices[{i}]"),
                    format!("expected {d} coordinates like the first vertex, found {}", v.len()),
                ));
            }
        }
        let pts: Vec<IntVector> = self.vertices.iter().map(|v| IntVector::new(v)).collect();
        hull(&pts).map_err(|e| at(&format!("{path}.vertices"), e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleJson {
    pub polytopes: Vec<PolytopeJson>,
}

impl TupleJson {
    pub fn from_tuple(t: &PolytopeTuple) -> Self {
        TupleJson { polytopes: t.members().iter().map(PolytopeJson::from_polytope).collect() }
    }

    pub fn to_tuple(&self, path: &str) -> Result<PolytopeTuple> {
        if self.polytopes.is_empty() {
            return Err(at(&format!("{path}.polytopes"), "a tuple needs at least one polytope"));
        }
        let mut ms = Vec::with_capacity(self.polytopes.len());
        for (i, p) in self.polytopes.iter().enumerate() {
            let q = p.to_polytope(&format!("{path}.polytopes[{i}]"))?;
            if let Some(first) = ms.first() {
                let first: &LatticePolytope = first;
                if first.ambient_dim() != q.ambient_dim() {
                    return Err(at(
                        &format!("{path}.polytopes[{i}]"),
                        format!("ambient dimension {} differs from {}", q.ambient_dim(), first.ambient_dim()),
                    ));
                }
            }
            ms.push(q);
        }
        PolytopeTuple::new(ms)
    }
}

pub fn polytope_to_json(p: &LatticePolytope) -> Value {
    serde_json::to_value(PolytopeJson::from_polytope(p)).expect("plain data")
}

pub fn tuple_to_json(t: &PolytopeTuple) -> Value {
    serde_json::to_value(TupleJson::from_tuple(t)).expect("plain data")
}

pub fn polytope_from_json(v: &Value) -> Result<LatticePolytope> {
    from_value_at::<PolytopeJson>(v, "$")?.to_polytope("$")
}

pub fn tuple_from_json(v: &Value) -> Result<PolytopeTuple> {
    from_value_at::<TupleJson>(v, "$")?.to_tuple("$")
}

fn parse_point(s: &str, d: usize) -> Result<IntVector> {
    let bad = || Error::Input(format!("cannot parse point {s:?}"));
    let mut v = IntVector::zero(d);
    if s == "0" {
        return Ok(v);
    }
    let mut rest = s;
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'-' => (-1, &rest[1..]),
            b'+' => (1, &rest[1..]),
            _ => (1, rest),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let end = body[1..].find(['+', '-']).map(|i| i + 1).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        let (coef, unit) = term.split_once('e').ok_or_else(bad)?;
        let c: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
        let i: usize = unit.parse().map_err(|_| bad())?;
        if i == 0 || i > d {
            return Err(bad());
        }
        v[i - 1] += sign * c;
    }
    Ok(v)
}

/// Parses sums of dilated hulls written like `conv(0, e1-e3, e2-e3) + 2conv(0, e1)`.
pub fn parse_conv_expr(s: &str, d: usize) -> Result<LatticePolytope> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).map(|c| if c == '\u{2212}' { '-' } else { c }).collect();
    let mut terms = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                terms.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    terms.push(&s[start..]);
    let mut parts = Vec::with_capacity(terms.len());
    for t in terms {
        let (coef, body) = t.split_once("conv(").ok_or_else(|| Error::Input(format!("expected conv(...) in {t:?}")))?;
        let body = body.strip_suffix(')').ok_or_else(|| Error::Input(format!("unbalanced parentheses in {t:?}")))?;
        let k: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| Error::Input(format!("bad factor {coef:?}")))? };
        let pts = body.split(',').map(|p| parse_point(p, d)).collect::<Result<Vec<_>>>()?;
        parts.push(hull(&pts)?.dilate(k));
    }
    let refs: Vec<&LatticePolytope> = parts.iter().collect();
    minkowski_sum(&refs)
}

/// Input that is either a single polytope or a tuple.
#[derive(Clone, Debug)]
pub enum Shape {
    Polytope(LatticePolytope),
    Tuple(PolytopeTuple),
}

pub fn shape_from_json(v: &Value) -> Result<Shape> {
    match v {
        Value::Object(o) if o.contains_key("polytopes") => tuple_from_json(v).map(Shape::Tuple),
        Value::Object(o) if o.contains_key("vertices") => polytope_from_json(v).map(Shape::Polytope),
        _ => Err(at("$", "expected an object with \"vertices\" or \"polytopes\"")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunKind {
    #[serde(rename = "volume-enum")]
    VolumeEnum,
    #[serde(rename = "pairs-2d")]
    Pairs2d,
    #[serde(rename = "triples-3d")]
    Triples3d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub key: String,
    pub polytopes: Vec<PolytopeJson>,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_volume: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximal_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structural_type: Option<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub also_matches: Vec<u8>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ambiguous: bool,
}

impl RecordJson {
    pub fn tuple(&self, path: &str) -> Result<PolytopeTuple> {
        TupleJson { polytopes: self.polytopes.clone() }.to_tuple(path)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: RunKind,
    /// Volume bound, largest mixed volume, or the mixed volume of the run.
    pub m: i64,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub class_count: usize,
    /// Classes per volume or mixed volume.
    pub counts_by_m: BTreeMap<i64, usize>,
    /// Full-dimensional classes per structural type (`"0"`..`"4"`, `"untyped"`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_counts: Option<BTreeMap<String, usize>>,
    pub records: Vec<RecordJson>,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn from_json(v: &Value) -> Result<Self> {
        let m: Manifest = from_value_at(v, "$")?;
        if m.class_count != m.records.len() {
            return Err(at("$.class_count", format!("{} does not match {} records", m.class_count, m.records.len())));
        }
        Ok(m)
    }
}

/// Manifest of an `enum-volume` run: polytopes in affine normal position.
pub fn volume_manifest(d: usize, max_volume: i64, polys: &[LatticePolytope], secs: f64) -> Result<Manifest> {
    let mut counts = BTreeMap::new();
    let mut records = Vec::with_capacity(polys.len());
    for p in polys {
        *counts.entry(p.volume()).or_insert(0) += 1;
        records.push(RecordJson {
            key: affine_key(p)?.to_hex(),
            polytopes: vec![PolytopeJson::from_polytope(p)],
            dims: vec![p.dim()],
            volume: Some(p.volume()),
            mixed_volume: None,
            maximal_kind: None,
            structural_type: None,
            also_matches: vec![],
            ambiguous: false,
        });
    }
    Ok(Manifest {
        kind: RunKind::VolumeEnum,
        m: max_volume,
        dimension: d,
        mode: None,
        class_count: records.len(),
        counts_by_m: counts,
        type_counts: None,
        records,
        tool_version: TOOL_VERSION.to_string(),
        wall_clock_seconds: secs,
    })
}

fn kind_name(t: &PolytopeTuple) -> Result<String> {
    let mut r = true;
    for i in 0..t.len() {
        r &= is_r_maximal_in(t, i)?;
    }
    Ok(if r { "R-maximal" } else { "Z-maximal-only" }.to_string())
}

/// Manifest of an `enum-pairs2d` run; `levels` lists the classes per mixed volume.
pub fn pairs_manifest(max_mv: i64, levels: &[(i64, Vec<PolytopeTuple>)], secs: f64) -> Result<Manifest> {
    let mut counts = BTreeMap::new();
    let mut records = Vec::new();
    for (m, pairs) in levels {
        counts.insert(*m, pairs.len());
        for t in pairs {
            records.push(RecordJson {
                key: tuple_canonical_key(t)?.to_hex(),
                polytopes: TupleJson::from_tuple(t).polytopes,
                dims: t.members().iter().map(|p| p.dim()).collect(),
                volume: None,
                mixed_volume: Some(*m),
                maximal_kind: Some(kind_name(t)?),
                structural_type: None,
                also_matches: vec![],
                ambiguous: false,
            });
        }
    }
    Ok(Manifest {
        kind: RunKind::Pairs2d,
        m: max_mv,
        dimension: 2,
        mode: None,
        class_count: records.len(),
        counts_by_m: counts,
        type_counts: None,
        records,
        tool_version: TOOL_VERSION.to_string(),
        wall_clock_seconds: secs,
    })
}

fn type_count_map(c: &[usize; 6]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for (i, n) in c.iter().enumerate().take(5) {
        out.insert(i.to_string(), *n);
    }
    out.insert("untyped".to_string(), c[5]);
    out
}

/// Manifest of an `enum-triples` run.
pub fn triples_manifest(m: i64, mode: Mode, records: &[ClassRecord], secs: f64) -> Manifest {
    let recs: Vec<RecordJson> = records
        .iter()
        .map(|r| RecordJson {
            key: r.key.to_hex(),
            polytopes: TupleJson::from_tuple(&r.representative).polytopes,
            dims: r.dims.clone(),
            volume: None,
            mixed_volume: Some(r.mixed_volume),
            maximal_kind: Some(r.maximal_kind.name().to_string()),
            structural_type: r.structural_type.as_ref().map(|t| t.kind.code()),
            also_matches: r.structural_type.as_ref().map(|t| t.also_matches.clone()).unwrap_or_default(),
            ambiguous: r.structural_type.as_ref().is_some_and(|t| t.is_ambiguous()),
        })
        .collect();
    Manifest {
        kind: RunKind::Triples3d,
        m,
        dimension: 3,
        mode: Some(mode.name().to_string()),
        class_count: recs.len(),
        counts_by_m: BTreeMap::from([(m, recs.len())]),
        type_counts: Some(type_count_map(&type_counts(records))),
        records: recs,
        tool_version: TOOL_VERSION.to_string(),
        wall_clock_seconds: secs,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// Class counts of maximal irreducible triples.
    TripleCounts,
    /// Structural-type counts and the exceptional triples.
    TypeTable,
    /// Class counts of maximal polygon pairs.
    N2,
}

impl std::str::FromStr for Reference {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "thm16" => Ok(Reference::TripleCounts),
            "thm17" => Ok(Reference::TypeTable),
            "n2" => Ok(Reference::N2),
            _ => Err(format!("unknown reference {s:?}; expected thm16, thm17 or n2")),
        }
    }
}

/// Outcome of a verification: one line per compared quantity.
#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub lines: Vec<String>,
    pub mismatches: usize,
}

impl VerifyReport {
    fn compare(&mut self, what: &str, expected: usize, found: usize) {
        if expected == found {
            self.lines.push(format!("  {what}: {found}"));
        } else {
            self.mismatches += 1;
            self.lines.push(format!("- {what}: expected {expected}"));
            self.lines.push(format!("+ {what}: found {found}"));
        }
    }

    pub fn ok(&self) -> bool {
        self.mismatches == 0
    }
}

/// Recomputes every record's key and mixed volume; a disagreement means the
/// manifest is corrupt or was produced by a faulty build.
fn check_records(man: &Manifest) -> Result<Vec<PolytopeTuple>> {
    let mut out = Vec::with_capacity(man.records.len());
    for (i, r) in man.records.iter().enumerate() {
        let path = format!("$.records[{i}]");
        let t = r.tuple(&path)?;
        let key = CanonicalForm::from_hex(&r.key).map_err(|e| at(&format!("{path}.key"), e))?;
        if tuple_canonical_key(&t)? != key {
            return internal(format!("{path}: stored key does not match the polytopes"));
        }
        if let Some(mv) = r.mixed_volume {
            if mixed_volume(&t)? != mv {
                return internal(format!("{path}: stored mixed volume {mv} is wrong"));
            }
        }
        out.push(t);
    }
    Ok(out)
}

fn reference_index(man: &Manifest, len: usize) -> Result<usize> {
    if man.m < 1 || man.m as usize > len {
        return input(format!("no reference data for m = {}", man.m));
    }
    Ok(man.m as usize - 1)
}

/// Compares a manifest with the built-in reference tables.
pub fn verify_manifest(man: &Manifest, reference: Reference) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    match reference {
        Reference::N2 => {
            if man.kind != RunKind::Pairs2d {
                return input("the n2 reference applies to pairs-2d manifests");
            }
            let last = man.m.min(N2.len() as i64);
            if last < 1 {
                return input(format!("no reference data for m = {}", man.m));
            }
            check_records(man)?;
            for m in 1..=last {
                let found = man.records.iter().filter(|r| r.mixed_volume == Some(m)).count();
                rep.compare(&format!("N2({m})"), N2[m as usize - 1], found);
            }
            if man.m > last {
                rep.lines.push(format!("  no reference beyond m = {last}"));
            }
        }
        Reference::TripleCounts => {
            if man.kind != RunKind::Triples3d {
                return input("the thm16 reference applies to triples-3d manifests");
            }
            let i = reference_index(man, N3.len())?;
            check_records(man)?;
            let full = man.records.iter().filter(|r| r.dims.iter().all(|&k| k == 3)).count();
            if man.mode.as_deref() == Some(Mode::FullDim.name()) {
                rep.compare(&format!("N3'({})", man.m), N3_FULL_DIM[i], man.records.len());
            } else {
                rep.compare(&format!("N3({})", man.m), N3[i], man.records.len());
                rep.compare(&format!("N3'({})", man.m), N3_FULL_DIM[i], full);
            }
        }
        Reference::TypeTable => {
            if man.kind != RunKind::Triples3d {
                return input("the thm17 reference applies to triples-3d manifests");
            }
            let i = reference_index(man, N3.len())?;
            let tuples = check_records(man)?;
            let mut counts = [0usize; 6];
            let mut exceptional_found = BTreeSet::new();
            for (r, t) in man.records.iter().zip(&tuples) {
                if !r.dims.iter().all(|&k| k == 3) {
                    continue;
                }
                match r.structural_type {
                    Some(c) if c < 5 => counts[c as usize] += 1,
                    Some(c) => return Err(at("$.records", format!("unknown structural type {c}"))),
                    None => counts[5] += 1,
                }
                if r.structural_type == Some(4) {
                    exceptional_found.insert(tuple_canonical_key(t)?);
                }
            }
            for (ty, row) in TYPE_TABLE.iter().enumerate() {
                rep.compare(&format!("type {ty} at m = {}", man.m), row[i], counts[ty]);
            }
            rep.compare(&format!("untyped at m = {}", man.m), 0, counts[5]);
            let mut expected = BTreeSet::new();
            for t in exceptional_triples() {
                if mixed_volume(&t)? == man.m {
                    expected.insert(tuple_canonical_key(&t)?);
                }
            }
            rep.compare(
                &format!("listed exceptional triples found at m = {}", man.m),
                expected.len(),
                expected.intersection(&exceptional_found).count(),
            );
        }
    }
    Ok(rep)
}

#[derive(Serialize, Deserialize)]
struct LevelFile {
    mode: String,
    m: i64,
    triples: Vec<TupleJson>,
}

#[derive(Serialize, Deserialize)]
struct ProgressFile {
    queue: Vec<TupleJson>,
    registry: Vec<String>,
    found: Vec<TupleJson>,
}

/// Level store backed by JSON files in a directory: `<mode>-m<m>-level.json`
/// for finished levels and `<mode>-m<m>-progress.json` for the level in work.
pub struct DirStore {
    dir: PathBuf,
    stop_after: Option<usize>,
    saves: AtomicUsize,
}

impl DirStore {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(DirStore { dir: dir.to_path_buf(), stop_after: None, saves: AtomicUsize::new(0) })
    }

    /// Stops the run after `n` progress saves (for interruption tests).
    pub fn stop_after(mut self, n: usize) -> Self {
        self.stop_after = Some(n);
        self
    }

    fn level_path(&self, mode: Mode, m: i64) -> PathBuf {
        self.dir.join(format!("{}-m{m}-level.json", mode.name()))
    }

    fn progress_path(&self, mode: Mode, m: i64) -> PathBuf {
        self.dir.join(format!("{}-m{m}-progress.json", mode.name()))
    }

    /// Removes every checkpoint file of `mode`.
    pub fn clear(&self, mode: Mode) -> Result<()> {
        let prefix = format!("{}-m", mode.name());
        for e in fs::read_dir(&self.dir)? {
            let e = e?;
            let name = e.file_name().to_string_lossy().into_owned();
            if name.starts_with(&prefix) && name.ends_with(".json") {
                fs::remove_file(e.path())?;
            }
        }
        Ok(())
    }

    fn read(path: &Path) -> Result<Option<Value>> {
        if path.exists() {
            read_json(path).map(Some)
        } else {
            Ok(None)
        }
    }
}

fn tuples_at(ts: &[TupleJson], path: &str) -> Result<Vec<PolytopeTuple>> {
    ts.iter().enumerate().map(|(i, t)| t.to_tuple(&format!("{path}[{i}]"))).collect()
}

impl LevelStore for DirStore {
    fn load_level(&self, mode: Mode, m: i64) -> Result<Option<Vec<PolytopeTuple>>> {
        let Some(v) = Self::read(&self.level_path(mode, m))? else { return Ok(None) };
        let f: LevelFile = from_value_at(&v, "$")?;
        if f.mode != mode.name() || f.m != m {
            return Err(at("$", "checkpoint level belongs to a different run"));
        }
        tuples_at(&f.triples, "$.triples").map(Some)
    }

    fn save_level(&self, mode: Mode, m: i64, triples: &[PolytopeTuple]) -> Result<()> {
        let f = LevelFile { mode: mode.name().to_string(), m, triples: triples.iter().map(TupleJson::from_tuple).collect() };
        write_atomic(&self.level_path(mode, m), to_json_string(&f)?.as_bytes())?;
        let p = self.progress_path(mode, m);
        if p.exists() {
            fs::remove_file(p)?;
        }
        Ok(())
    }

    fn load_progress(&self, mode: Mode, m: i64) -> Result<Option<LevelProgress>> {
        let Some(v) = Self::read(&self.progress_path(mode, m))? else { return Ok(None) };
        let f: ProgressFile = from_value_at(&v, "$")?;
        let queue = tuples_at(&f.queue, "$.queue")?;
        let found = tuples_at(&f.found, "$.found")?;
        if f.registry.len() != found.len() {
            return Err(at("$.registry", "registry and found lists differ in length"));
        }
        for (i, (k, t)) in f.registry.iter().zip(&found).enumerate() {
            let key = CanonicalForm::from_hex(k).map_err(|e| at(&format!("$.registry[{i}]"), e))?;
            if tuple_canonical_key(t)? != key {
                return Err(at(&format!("$.registry[{i}]"), "key does not match the found triple"));
            }
        }
        Ok(Some(LevelProgress { queue, found }))
    }

    fn save_progress(&self, mode: Mode, m: i64, p: &LevelProgress) -> Result<()> {
        let f = ProgressFile {
            queue: p.queue.iter().map(TupleJson::from_tuple).collect(),
            registry: p.found.iter().map(|t| tuple_canonical_key(t).map(|k| k.to_hex())).collect::<Result<_>>()?,
            found: p.found.iter().map(TupleJson::from_tuple).collect(),
        };
        write_atomic(&self.progress_path(mode, m), to_json_string(&f)?.as_bytes())?;
        self.saves.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    fn should_stop(&self) -> bool {
        self.stop_after.is_some_and(|n| self.saves.load(Ordering::SeqCst) >= n)
    }
}

pub fn save_factory_state(path: &Path, state: &FactoryState) -> Result<()> {
    write_atomic(path, to_json_string(state)?.as_bytes())
}

pub fn load_factory_state(path: &Path) -> Result<FactoryState> {
    let v = read_json(path)?;
    let state: FactoryState = from_value_at(&v, "$")?;
    for (i, sw) in state.queue.iter().enumerate() {
        for (name, vs) in [("inner", &sw.inner), ("outer", &sw.outer)] {
            if vs.is_empty() || vs.iter().any(|x| x.dim() != state.d) {
                return Err(at(&format!("$.queue[{i}].{name}"), format!("expected vertices with {} coordinates", state.d)));
            }
        }
    }
    Ok(state)
}

pub fn manifest_json(man: &Manifest) -> Result<Value> {
    serde_json::to_value(man).map_err(|e| Error::Internal(format!("serialization failed: {e}")))
}

/// Summary value printed by `classify-type`.
pub fn typing_json(t: &PolytopeTuple) -> Result<Value> {
    let r = ClassRecord::from_tuple(t)?;
    Ok(json!({
        "mixed_volume": r.mixed_volume,
        "maximal_kind": r.maximal_kind.name(),
        "structural_type": r.structural_type.as_ref().map(|s| s.kind.code()),
        "also_matches": r.structural_type.as_ref().map(|s| s.also_matches.clone()).unwrap_or_default(),
    }))
}
