//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! The process exits successfully when the failing criteria are exactly the
//! ones listed in `KNOWN_FAILING`, so a regression and an unexpected fix both
//! break the build.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::brute::brute_force_keys;
use common::props::{self, Check};
use common::*;
use mixvol::classification::exceptional_triples;
use mixvol::equivalence::{affine_key, tuple_canonical_key};
use mixvol::io::Manifest;
use mixvol::maximality::{complete_maximal, is_r_maximal_in, is_z_maximal_in};
use mixvol::mixed::PolytopeTuple;
use mixvol::sandwich::enumerate_by_volume;
use mixvol::LatticePolytope;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAIRS_2D: [usize; 10] = [1, 3, 6, 13, 18, 38, 46, 87, 118, 202];
const TRIPLES: [usize; 4] = [1, 7, 21, 92];
const TRIPLES_FULL_DIM: [usize; 4] = [1, 4, 10, 30];
const TYPES: [[usize; 4]; 5] = [[1, 3, 6, 17], [0, 1, 1, 5], [0, 0, 1, 3], [0, 0, 1, 3], [0, 0, 1, 2]];
const VOLUME_CLASSES_3D: [(i64, usize); 2] = [(3, 6), (4, 17)];

const PAIRS_LIMIT: Duration = Duration::from_secs(3600);
const TRIPLES_LIMITS: [Duration; 4] = [
    Duration::from_secs(120),
    Duration::from_secs(120),
    Duration::from_secs(3600),
    Duration::from_secs(86_400),
];
const VOLUME_4_LIMIT: Duration = Duration::from_secs(300);
const VOLUME_6_LIMIT: Duration = Duration::from_secs(3600);
const INSTANCES: usize = 200;

/// The m = 4 row of the type table is not reproduced: two classes land in
/// type 2 that the reference table counts as type 3.
const KNOWN_FAILING: &[u32] = &[3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { pass: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { pass: false, detail: detail.into() }
}

struct Run {
    code: Option<i32>,
    elapsed: Duration,
    stderr: String,
}

fn mixvol(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_mixvol")).args(args).output().expect("run mixvol");
    Run {
        code: out.status.code(),
        elapsed: start.elapsed(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(p: &Path) -> Manifest {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    Manifest::from_json(&v).unwrap()
}

fn tuples(m: &Manifest) -> Vec<(Option<u8>, PolytopeTuple)> {
    m.records.iter().map(|r| (r.structural_type, r.tuple("$").unwrap())).collect()
}

fn record_keys(m: &Manifest) -> BTreeSet<String> {
    m.records.iter().map(|r| r.key.clone()).collect()
}

struct Workspace {
    dir: PathBuf,
}

impl Workspace {
    fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

fn run_ok(args: &[&str], what: &str) -> Result<Run, String> {
    let r = mixvol(args);
    if r.code != Some(0) {
        return Err(format!("{what} exited with {:?}: {}", r.code, r.stderr.trim()));
    }
    Ok(r)
}

fn criterion_1(ws: &Workspace) -> Result<Outcome, String> {
    let out = ws.file("pairs.json");
    let r = run_ok(&["enum-pairs2d", "--max-mv", "10", "--out", s(&out)], "enum-pairs2d")?;
    let man = manifest(&out);
    let found: Vec<usize> = (1..=10).map(|m| man.counts_by_m.get(&m).copied().unwrap_or(0)).collect();
    let verify = mixvol(&["verify", "--in", s(&out), "--reference", "n2"]);
    let detail = format!("N2 = {found:?} in {:.1}s", r.elapsed.as_secs_f64());
    if found != PAIRS_2D || verify.code != Some(0) || r.elapsed > PAIRS_LIMIT {
        return Ok(fail(format!("{detail}, expected {PAIRS_2D:?} within {}s", PAIRS_LIMIT.as_secs())));
    }
    Ok(pass(detail))
}

fn criterion_2(ws: &Workspace) -> Result<Outcome, String> {
    let mut found = Vec::new();
    let mut times = Vec::new();
    let mut late = Vec::new();
    for m in 1..=4usize {
        let out = ws.file(&format!("triples-m{m}.json"));
        let ms = m.to_string();
        let r = run_ok(&["enum-triples", "--mv", &ms, "--out", s(&out)], "enum-triples")?;
        found.push(manifest(&out).class_count);
        times.push(format!("{:.1}", r.elapsed.as_secs_f64()));
        if r.elapsed > TRIPLES_LIMITS[m - 1] {
            late.push(m);
        }
    }
    let ck = ws.file("checkpoint-full");
    let full4 = ws.file("full-m4.json");
    run_ok(&["enum-triples", "--mv", "4", "--full-dim-only", "--checkpoint", s(&ck), "--out", s(&full4)], "enum-triples")?;
    let mut found_full = Vec::new();
    for m in 1..=4usize {
        let out = ws.file(&format!("full-m{m}.json"));
        if m < 4 {
            let ms = m.to_string();
            run_ok(
                &["enum-triples", "--mv", &ms, "--full-dim-only", "--checkpoint", s(&ck), "--resume", "--out", s(&out)],
                "resumed enum-triples",
            )?;
        }
        found_full.push(manifest(&out).class_count);
    }

    // Interrupt a run after two checkpoints and resume it.
    let ick = ws.file("checkpoint-interrupted");
    let resumed = ws.file("resumed-m3.json");
    let r = mixvol(&["enum-triples", "--mv", "3", "--checkpoint", s(&ick), "--interrupt-after", "2", "--out", s(&resumed)]);
    let interrupted = r.code == Some(4) && !resumed.exists();
    run_ok(&["enum-triples", "--mv", "3", "--checkpoint", s(&ick), "--resume", "--out", s(&resumed)], "resume")?;
    let same = record_keys(&manifest(&resumed)) == record_keys(&manifest(&ws.file("triples-m3.json")));

    let detail = format!("N3 = {found:?}, N3' = {found_full:?}, seconds per m = [{}]", times.join(", "));
    if found != TRIPLES || found_full != TRIPLES_FULL_DIM || !late.is_empty() || !interrupted || !same {
        return Ok(fail(format!(
            "{detail}; expected {TRIPLES:?} and {TRIPLES_FULL_DIM:?}, over time at m = {late:?}, \
             interrupted = {interrupted}, resumed keys equal = {same}"
        )));
    }
    Ok(pass(format!("{detail}, interrupted run resumed to the same classes")))
}

fn criterion_3(ws: &Workspace) -> Result<Outcome, String> {
    let mut table = [[0usize; 4]; 5];
    let mut untyped = 0;
    let mut type4 = BTreeSet::new();
    for m in 1..=4usize {
        for (ty, t) in tuples(&manifest(&ws.file(&format!("full-m{m}.json")))) {
            match ty {
                Some(k) => table[k as usize][m - 1] += 1,
                None => untyped += 1,
            }
            if ty == Some(4) {
                type4.insert(tuple_canonical_key(&t).unwrap());
            }
        }
    }
    let exceptional: BTreeSet<_> = exceptional_triples().iter().map(|t| tuple_canonical_key(t).unwrap()).collect();
    let rows: Vec<String> = table.iter().enumerate().map(|(k, r)| format!("type {k} {r:?}")).collect();
    let mut detail = rows.join(", ");
    if table != TYPES || untyped != 0 || type4 != exceptional {
        for (k, (got, want)) in table.iter().zip(TYPES.iter()).enumerate() {
            if got != want {
                detail.push_str(&format!("; type {k} expected {want:?}"));
            }
        }
        detail.push_str(&format!("; untyped {untyped}; type 4 equals exceptional triples: {}", type4 == exceptional));
        return Ok(fail(detail));
    }
    Ok(pass(format!("{detail}; type 4 classes are the exceptional triples")))
}

fn criterion_4(ws: &Workspace) -> Result<Outcome, String> {
    let s3 = LatticePolytope::standard_simplex(3);
    let unimodular = tuple_canonical_key(&PolytopeTuple::new(vec![s3.clone(), s3.clone(), s3]).unwrap()).unwrap();
    let m1: Vec<_> = tuples(&manifest(&ws.file("triples-m1.json")));
    let m1_ok = m1.len() == 1 && tuple_canonical_key(&m1[0].1).unwrap() == unimodular;
    let mut problems = Vec::new();
    if !m1_ok {
        problems.push("m = 1 output is not the unimodular simplex triple".to_string());
    }
    for (m, key) in [(3usize, "volume_3"), (4, "volume_4")] {
        let bases: BTreeSet<_> = tuples(&manifest(&ws.file(&format!("full-m{m}.json"))))
            .iter()
            .filter(|(ty, _)| *ty == Some(0))
            .map(|(_, t)| affine_key(&t.members()[0]).unwrap())
            .collect();
        let listed: BTreeSet<_> = fixture_polytopes(key, 3).iter().map(|p| affine_key(p).unwrap()).collect();
        if bases != listed {
            problems.push(format!("type 0 bases at m = {m}: {} classes vs {} listed, not equal", bases.len(), listed.len()));
        }
    }
    if problems.is_empty() {
        Ok(pass("m = 1 is the unimodular simplex triple; type 0 bases equal the volume 3 (6) and volume 4 (17) lists"))
    } else {
        Ok(fail(problems.join("; ")))
    }
}

fn criterion_5(ws: &Workspace) -> Result<Outcome, String> {
    let mut problems = Vec::new();
    let mut detail = Vec::new();
    for (max, limit) in [(4, VOLUME_4_LIMIT), (6, VOLUME_6_LIMIT)] {
        let out = ws.file(&format!("volume-{max}.json"));
        let ms = max.to_string();
        let r = run_ok(&["enum-volume", "--dim", "3", "--max-volume", &ms, "--out", s(&out)], "enum-volume")?;
        let man = manifest(&out);
        detail.push(format!("max volume {max}: {} classes in {:.1}s", man.class_count, r.elapsed.as_secs_f64()));
        if r.elapsed > limit {
            problems.push(format!("max volume {max} took longer than {}s", limit.as_secs()));
        }
        for (v, n) in VOLUME_CLASSES_3D {
            let got = man.counts_by_m.get(&v).copied().unwrap_or(0);
            if got != n {
                problems.push(format!("volume {v}: {got} classes, expected {n}"));
            }
        }
    }
    for (d, top) in [(2usize, 3i64), (3, 2)] {
        for m in 1..=top {
            let lib: BTreeSet<Vec<u8>> =
                enumerate_by_volume(d, m).unwrap().iter().map(|p| affine_key(p).unwrap().as_bytes().to_vec()).collect();
            let brute = brute_force_keys(d, m);
            if lib != brute {
                problems.push(format!("d = {d}, m <= {m}: {} classes vs brute force {}", lib.len(), brute.len()));
            }
        }
    }
    detail.push("brute force agrees for d = 2, m <= 3 and d = 3, m <= 2".into());
    if problems.is_empty() {
        Ok(pass(detail.join("; ")))
    } else {
        Ok(fail(format!("{}; {}", detail.join("; "), problems.join("; "))))
    }
}

fn pts<R: Rng>(rng: &mut R, min: usize, max: usize) -> Vec<P3> {
    random_points(rng, min, max)
}

fn pts2<R: Rng>(rng: &mut R, min: usize, max: usize) -> Vec<[i64; 2]> {
    pts(rng, min, max).into_iter().map(|p| [p[0], p[1]]).collect()
}

fn vector<R: Rng>(rng: &mut R) -> P3 {
    pts(rng, 1, 1)[0]
}

/// Runs `check` until `INSTANCES` draws apply; `None` draws are skipped.
fn suite(name: &str, seed: u64, mut check: impl FnMut(&mut ChaCha8Rng) -> Option<Check>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut applied = 0;
    let mut draws = 0;
    while applied < INSTANCES {
        draws += 1;
        if draws > 100 * INSTANCES {
            return Err(format!("{name}: only {applied} applicable instances"));
        }
        if let Some(c) = check(&mut rng) {
            c.map_err(|e| format!("{name}: {e}"))?;
            applied += 1;
        }
    }
    Ok(())
}

fn criterion_6() -> Result<Outcome, String> {
    type Suite = (&'static str, Box<dyn FnMut(&mut ChaCha8Rng) -> Option<Check>>);
    let suites: Vec<Suite> = vec![
        ("symmetry", Box::new(|r| Some(props::symmetric(&pts(r, 1, 6), &pts(r, 1, 6), &pts(r, 1, 6))))),
        ("oracle agreement", Box::new(|r| Some(props::matches_oracle(&pts(r, 1, 4), &pts(r, 1, 4), &pts(r, 1, 4))))),
        (
            "multilinearity",
            Box::new(|r| Some(props::linear(&pts(r, 1, 5), &pts(r, 1, 5), &pts(r, 1, 5), &pts(r, 1, 5)))),
        ),
        (
            "monotonicity",
            Box::new(|r| Some(props::monotone(&pts(r, 1, 5), &pts(r, 1, 3), &pts(r, 1, 5), &pts(r, 1, 5)))),
        ),
        (
            "invariance",
            Box::new(|r| {
                let (a, b, c) = (pts(r, 1, 5), pts(r, 1, 5), pts(r, 1, 5));
                let u = random_unimodular(r);
                Some(props::invariant(&a, &b, &c, &u, [vector(r), vector(r), vector(r)]))
            }),
        ),
        (
            "Aleksandrov-Fenchel",
            Box::new(|r| Some(props::aleksandrov_fenchel(&pts(r, 1, 6), &pts(r, 1, 6), &pts(r, 1, 6)))),
        ),
        (
            "positivity iff nondegeneracy",
            Box::new(|r| Some(props::positive_iff_nondegenerate(&pts(r, 1, 4), &pts(r, 1, 4), &pts(r, 1, 4)))),
        ),
        ("decomposition", Box::new(|r| Some(props::decomposes(&pts2(r, 1, 5), &pts2(r, 1, 5), &pts(r, 1, 6))))),
        (
            "measure formula",
            Box::new(|r| Some(props::measure_formula(&pts(r, 1, 6), &pts(r, 1, 6), &pts(r, 1, 6)))),
        ),
        ("mixed area measure", Box::new(|r| props::polarized_measure(&pts(r, 4, 7), &pts(r, 4, 7)))),
        ("segment determinant", Box::new(|r| props::segment_determinant(vector(r), vector(r), vector(r)))),
        ("V(P,P,P) = Vol(P)", Box::new(|r| Some(props::diagonal_is_volume(&pts(r, 1, 8))))),
    ];
    let n = suites.len();
    let mut failures = Vec::new();
    for (i, (name, check)) in suites.into_iter().enumerate() {
        if let Err(e) = suite(name, 1000 + i as u64, check) {
            failures.push(e);
        }
    }
    if failures.is_empty() {
        Ok(pass(format!("{n} suites x {INSTANCES} instances, coordinates in -2..2, no failures")))
    } else {
        Ok(fail(failures.join("; ")))
    }
}

fn r_maximal_everywhere(t: &PolytopeTuple) -> bool {
    (0..t.len()).all(|i| is_r_maximal_in(t, i).unwrap())
}

fn constructions_hold(make: fn(&mut ChaCha8Rng) -> Option<PolytopeTuple>, seed: u64) -> Option<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < INSTANCES {
        if let Some(t) = make(&mut rng) {
            if !r_maximal_everywhere(&t) {
                return Some(format!("{t:?}"));
            }
            checked += 1;
        }
    }
    None
}

fn criterion_7() -> Result<Outcome, String> {
    let mut problems = Vec::new();
    let s3 = LatticePolytope::standard_simplex(3);
    if complete_maximal(&s3, &s3, 4).unwrap() != vec![s3.dilate(4)] {
        problems.push("(D3, D3, .) at m = 4 does not complete uniquely to 4 D3".to_string());
    }
    let p1 = LatticePolytope::from_coords(&[&[0, 0], &[2, 0], &[0, 1]]).unwrap();
    let p2 = LatticePolytope::from_coords(&[&[0, 0], &[3, 0], &[1, 1], &[0, 1]]).unwrap();
    let pair = PolytopeTuple::new(vec![p1, p2]).unwrap();
    if !is_z_maximal_in(&pair, 1).unwrap() || is_r_maximal_in(&pair, 1).unwrap() {
        problems.push("triangle/trapezoid pair is not Z- but non-R-maximal in slot 2".to_string());
    }
    if let Some(t) = constructions_hold(common::constructions::segment_sum, 11) {
        problems.push(format!("segment sum not R-maximal: {t}"));
    }
    if let Some(t) = constructions_hold(common::constructions::trapezoid_pyramid, 12) {
        problems.push(format!("trapezoid pyramid not R-maximal: {t}"));
    }
    let ex = exceptional_triples();
    if ex.iter().any(r_maximal_everywhere) {
        problems.push("an exceptional triple is R-maximal in every slot".to_string());
    }
    if problems.is_empty() {
        Ok(pass(format!(
            "unique 4 D3 completion, Z-only slot 2 pair, {INSTANCES} segment sums and {INSTANCES} pyramids R-maximal, {} exceptional triples not",
            ex.len()
        )))
    } else {
        Ok(fail(problems.join("; ")))
    }
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let ws = Workspace { dir: tmp.path().to_path_buf() };
    let criteria: Vec<(u32, &str, Box<dyn Fn(&Workspace) -> Result<Outcome, String>>)> = vec![
        (1, "maximal planar pairs, N2 for m <= 10", Box::new(criterion_1)),
        (2, "maximal triples, N3 and N3' for m <= 4", Box::new(criterion_2)),
        (3, "structural type table for m <= 4", Box::new(criterion_3)),
        (4, "m = 1 class and volume lists", Box::new(criterion_4)),
        (5, "volume enumeration and brute force", Box::new(criterion_5)),
        (6, "mixed volume property suites", Box::new(|_| criterion_6())),
        (7, "maximality regressions", Box::new(|_| criterion_7())),
    ];
    let mut failing = Vec::new();
    for (id, name, run) in &criteria {
        let start = Instant::now();
        let outcome = run(&ws).unwrap_or_else(|e| fail(format!("could not run: {e}")));
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {id} ({name}) [{:.1}s]: {}", start.elapsed().as_secs_f64(), outcome.detail);
        if !outcome.pass {
            failing.push(*id);
        }
    }
    println!("failing: {failing:?}, known failing: {KNOWN_FAILING:?}");
    if failing != KNOWN_FAILING {
        eprintln!("acceptance outcome differs from the known failing set");
        std::process::exit(1);
    }
}
