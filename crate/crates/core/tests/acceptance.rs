//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use dualcx::action::{quotient_complex, ComplexAction};
use dualcx::complex::{build_dual_complex, DeltaComplex};
use dualcx::covering::{covering_stats, total_space, CoveringDatum};
use dualcx::error::Error;
use dualcx::homology::{
    chain_complex, homology_mod_direct, homology_with_coefficients, integral_homology, Coefficients,
};
use dualcx::incidence::IncidenceStructure;
use dualcx::mckay::{self, contractibility_assessment, McKayInput, Verdict};
use dualcx::pi1::{abelianization, edge_path_presentation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:.0?}"))
}

fn klein_dynkin() -> Outcome {
    let start = Instant::now();
    let doc = read_json(&corpus_dir().join("structures/binary_dihedral_3.json"));
    let c = build_dual_complex(&IncidenceStructure::from_value(&doc).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(c.counts() == vec![5, 4], || format!("counts {:?}, expected 5 vertices and 4 edges", c.counts()))?;
    let h = integral_homology(&chain_complex(&c)).map_err(|e| e.to_string())?;
    ensure(h.is_acyclic(), || format!("homology {:?}", h.describe()))?;
    let verdict = contractibility_assessment(&c).map_err(|e| e.to_string())?;
    ensure(verdict.is_certified(), || format!("contractibility {verdict:?}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("5 vertices, 4 edges, H_0 = Z only, certified contractible in {:.2?}", start.elapsed()))
}

fn quotient_oracle_on_corpus() -> Outcome {
    let start = Instant::now();
    let pairs = action_pairs();
    for required in ["sphere_trivial_action", "path_swap", "cycle3_rotation"] {
        ensure(pairs.iter().any(|(n, ..)| n == required), || format!("corpus lacks {required}"))?;
    }
    ensure(pairs.len() >= 6, || format!("only {} pairs", pairs.len()))?;
    for (name, s, g) in &pairs {
        quotient_oracle(s, g).map_err(|e| format!("{name}: {e}"))?;
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("{} pairs agree in {:.2?}", pairs.len(), start.elapsed()))
}

fn mckay_pairs() -> Outcome {
    let start = Instant::now();
    let wanted =
        [Coefficients::Integers, Coefficients::IntegersMod(2), Coefficients::IntegersMod(3), Coefficients::Rationals];
    let files = corpus_files("mckay");
    ensure(files.iter().any(|p| name(p) == "a1"), || "corpus lacks the A1 pair".into())?;
    ensure(files.len() >= 3, || format!("only {} pairs", files.len()))?;
    for path in &files {
        let mut input = McKayInput::from_value(&read_json(path)).map_err(|e| e.to_string())?;
        input.coefficients = wanted.to_vec();
        let report = mckay::run(&input).map_err(|e| format!("{}: {e}", name(path)))?;
        for c in &report.homology {
            ensure(c.verdict == Verdict::Match, || format!("{}: {} over {}", name(path), c.verdict, c.coefficients))?;
        }
        ensure(report.pi1.verdict.is_match(), || format!("{}: fundamental groups {}", name(path), report.pi1.verdict))?;
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("{} pairs match over Z, Z/2, Z/3, Q in {:.2?}", files.len(), start.elapsed()))
}

/// Dual complexes of every corpus structure and the quotient complexes of
/// every corpus action.
fn corpus_complexes() -> Result<Vec<(String, DeltaComplex)>, String> {
    let mut out = Vec::new();
    for (name, s) in all_structures() {
        out.push((name, build_dual_complex(&s).map_err(|e| e.to_string())?));
    }
    for (name, s, g) in action_pairs() {
        let action = ComplexAction::new(&s, &g).map_err(|e| e.to_string())?;
        out.push((format!("{name} quotient"), quotient_complex(&action).map_err(|e| e.to_string())?.complex));
    }
    Ok(out)
}

fn abelianization_is_h1() -> Outcome {
    let mut checked = 0;
    for (name, c) in corpus_complexes()? {
        if !connected(&c) {
            continue;
        }
        let h1 = integral_homology(&chain_complex(&c)).map_err(|e| e.to_string())?.group(1);
        let ab = abelianization(&edge_path_presentation(&c, 0).map_err(|e| e.to_string())?);
        ensure(ab.same_group(&h1), || format!("{name}: abelianization {ab:?} vs H_1 {h1:?}"))?;
        checked += 1;
    }
    Ok(format!("{checked} connected complexes"))
}

fn uct_consistency() -> Outcome {
    let complexes = corpus_complexes()?;
    for (name, c) in &complexes {
        let cc = chain_complex(c);
        let h = integral_homology(&cc).map_err(|e| e.to_string())?;
        for n in [2u64, 3, 4, 6] {
            let predicted = homology_with_coefficients(&h, Coefficients::IntegersMod(n));
            let direct = homology_mod_direct(&cc, n).map_err(|e| e.to_string())?;
            ensure(predicted.same_groups(&direct), || {
                format!("{name} mod {n}: {:?} vs {:?}", predicted.describe(), direct.describe())
            })?;
        }
    }
    Ok(format!("{} complexes for n = 2, 3, 4, 6", complexes.len()))
}

fn covering_suite() -> Outcome {
    let load = |path: &Path| -> Result<(DeltaComplex, CoveringDatum), String> {
        let doc = read_json(path);
        let s = IncidenceStructure::from_value(&doc["base"]).map_err(|e| e.to_string())?;
        let datum = CoveringDatum::from_value(&doc["datum"]).map_err(|e| e.to_string())?;
        Ok((build_dual_complex(&s).map_err(|e| e.to_string())?, datum))
    };
    let (base, datum) = load(&corpus_dir().join("coverings/hexagon.json"))?;
    let stats = covering_stats(&total_space(&base, &datum).map_err(|e| e.to_string())?, &base);
    ensure(stats.sheets == 2 && stats.connected, || {
        format!("hexagon: {} sheets, connected {}", stats.sheets, stats.connected)
    })?;
    let swap: BTreeMap<String, String> =
        [("a", "b"), ("b", "a")].iter().map(|(x, y)| (x.to_string(), y.to_string())).collect();
    ensure(stats.monodromy.values().cloned().collect::<Vec<_>>() == vec![swap], || {
        format!("hexagon monodromy {:?}", stats.monodromy)
    })?;

    let (base, datum) = load(&corpus_dir().join("invalid/broken_cocycle.json"))?;
    match total_space(&base, &datum) {
        Err(Error::CocycleViolation(simplex)) if simplex == "E1,E2,E3/t" => {}
        other => return Err(format!("broken cocycle: {:?}", other.map(|c| c.complex.counts()))),
    }

    let files = corpus_files("coverings");
    for path in &files {
        let (base, datum) = load(path)?;
        let cover = total_space(&base, &datum).map_err(|e| format!("{}: {e}", name(path)))?;
        let stats = covering_stats(&cover, &base);
        ensure(cover.complex.euler_characteristic() == stats.sheets as i64 * base.euler_characteristic(), || {
            format!(
                "{}: χ = {} over χ = {} with {} sheets",
                name(path),
                stats.euler_cover,
                stats.euler_base,
                stats.sheets
            )
        })?;
        cover_checks(&base, &datum).map_err(|e| format!("{}: {e}", name(path)))?;
    }
    Ok(format!(
        "hexagon connected with a transposition, cocycle failure on E1,E2,E3/t, χ multiplicative on {} data",
        files.len()
    ))
}

fn fuzz() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut nontrivial = 0;
    for i in 0..200 {
        let e = random_equivariant(&mut rng, 8);
        let s = &e.structure;
        ensure(s.component_count() <= 8 && s.strata().all(|st| st.pieces().len() <= 3), || {
            format!("sample {i} out of bounds")
        })?;
        let c = build_dual_complex(s).map_err(|err| format!("sample {i}: {err}"))?;
        ensure(c.check_simplicial_identities().is_empty(), || format!("sample {i}: simplicial identities"))?;
        ensure(boundaries_compose_to_zero(&chain_complex(&c)), || format!("sample {i}: boundary of boundary"))?;
        quotient_oracle(s, &e.group).map_err(|err| format!("sample {i}: {err}"))?;
        if e.permutation.iter().enumerate().any(|(v, &w)| v != w) {
            nontrivial += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("200 structures ({nontrivial} with nontrivial actions) in {:.2?}", start.elapsed()))
}

/// Every command over the corpus, as argument lists relative to the corpus
/// directory. Each report goes to its own `--json` file.
fn cli_suite() -> Vec<Vec<String>> {
    let rel = |p: &PathBuf| p.strip_prefix(corpus_dir()).unwrap().to_string_lossy().into_owned();
    let mut runs: Vec<Vec<String>> = Vec::new();
    for sub in ["structures", "coverings", "mckay", "invalid"] {
        for p in corpus_files(sub) {
            runs.push(vec!["validate".into(), rel(&p)]);
        }
    }
    for p in corpus_files("structures") {
        let f = rel(&p);
        runs.push(vec!["homology".into(), f.clone(), "--coefficients".into(), "z,z2,z3,z4,z6,q,tq".into()]);
        runs.push(vec!["pi1".into(), f.clone()]);
        runs.push(vec!["euler".into(), f.clone()]);
        if read_json(&p).get("group").is_some() {
            runs.push(vec!["homology".into(), f.clone(), "--quotient".into()]);
            runs.push(vec!["pi1".into(), f.clone(), "--quotient".into()]);
            runs.push(vec!["quotient".into(), f.clone()]);
            runs.push(vec!["euler".into(), f.clone(), "--quotient".into()]);
        }
    }
    for p in corpus_files("coverings").iter().chain(&corpus_files("invalid")) {
        runs.push(vec!["covering".into(), rel(p)]);
    }
    for p in corpus_files("mckay") {
        runs.push(vec!["mckay".into(), rel(&p)]);
    }
    runs
}

fn run_suite(out: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let _ = std::fs::remove_dir_all(out);
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let mut outputs = BTreeMap::new();
    for (i, args) in cli_suite().into_iter().enumerate() {
        let file = format!("{i:03}-{}.json", args[0]);
        let result = Command::new(env!("CARGO_BIN_EXE_dualcx"))
            .args(&args)
            .args(["--json", &file])
            .current_dir(corpus_dir())
            .env("DUALCX_OUT_DIR", out)
            .output()
            .map_err(|e| e.to_string())?;
        let code = result.status.code().unwrap_or(-1);
        let mut bytes = std::fs::read(out.join(&file)).unwrap_or_default();
        bytes.extend(format!("exit {code}\n").bytes());
        bytes.extend(result.stdout);
        bytes.extend(result.stderr);
        outputs.insert(file, bytes);
    }
    Ok(outputs)
}

fn determinism() -> Outcome {
    let base = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let first = run_suite(&base.join("first"))?;
    let second = run_suite(&base.join("second"))?;
    for (file, bytes) in &first {
        ensure(second.get(file) == Some(bytes), || format!("{file} differs between runs"))?;
    }
    ensure(first.len() == second.len(), || "different report sets".into())?;
    Ok(format!("{} reports byte-identical across two runs", first.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("Klein/Dynkin reproduction", klein_dynkin),
        ("quotient oracle", quotient_oracle_on_corpus),
        ("McKay instantiation", mckay_pairs),
        ("abelianization equals H_1", abelianization_is_h1),
        ("universal coefficients", uct_consistency),
        ("covering suite", covering_suite),
        ("identity and boundary fuzz", fuzz),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {title}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL  {title}: {reason}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
