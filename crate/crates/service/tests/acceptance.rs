//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use adgene_core::corpora::{export_jsonl, generate, import_jsonl, split_corpus, Corpus, TemplateSet};
use adgene_core::engines::{dispatch_with, Lexicon};
use adgene_core::eval::{
    build_report, evaluate_engine, llama31_8b_all_projections, lora_param_count, paired_t_test, t_quantile,
    AdaptedMatrix, LoraLayerSpec, REPORTED_BASE_PARAMS, REPORTED_LORA_PARAMS,
};
use adgene_core::ingest::Manifest;
use adgene_core::router::{train_router, RouterModel, DEFAULT_SMOOTHING};
use adgene_core::{BrainRegion, GroundedTemplateBackend, KnowledgeBase, TaskLabel, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240601;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Fixture {
    kb: KnowledgeBase,
    std_splits: BTreeMap<TaskLabel, (Corpus, Corpus)>,
    para_splits: BTreeMap<TaskLabel, (Corpus, Corpus)>,
    router: RouterModel,
}

fn train(corpora: &[&Corpus]) -> RouterModel {
    train_router(
        corpora
            .iter()
            .flat_map(|c| c.examples.iter().map(|e| (e.instruction.as_str(), e.task))),
        DEFAULT_SMOOTHING,
    )
    .expect("router trains")
}

impl Fixture {
    fn load() -> Self {
        let kb = common::kb();
        let split = |set: &TemplateSet| -> BTreeMap<_, _> {
            TaskLabel::ALL
                .into_iter()
                .map(|t| {
                    let c = generate(&kb, set, t, SEED).unwrap();
                    (t, split_corpus(&c, 0.1, SEED).unwrap())
                })
                .collect()
        };
        let std_splits = split(&TemplateSet::standard());
        let para_splits = split(&TemplateSet::paraphrases());
        let train_sets: Vec<&Corpus> = std_splits
            .values()
            .chain(para_splits.values())
            .map(|(tr, _)| tr)
            .collect();
        let router = train(&train_sets);
        Self {
            kb,
            std_splits,
            para_splits,
            router,
        }
    }

    fn test_split(&self, task: TaskLabel) -> &Corpus {
        &self.std_splits[&task].1
    }
}

fn task2_perfection(f: &Fixture) -> Outcome {
    let test = f.test_split(TaskLabel::Task2);
    let started = Instant::now();
    let r = evaluate_engine(&f.kb, &f.router, &GroundedTemplateBackend, test);
    let secs = started.elapsed().as_secs_f64();
    let m = r.metrics.ok_or("no metrics")?;
    let c = r.confusion.ok_or("no confusion counts")?;
    ensure(test.len() == 1123, || {
        format!("test split has {} examples, expected 1123", test.len())
    })?;
    ensure(c.tp > 0 && c.tn > 0, || format!("split lacks both classes: {c:?}"))?;
    ensure([m.accuracy, m.precision, m.recall, m.f1] == [1.0; 4], || {
        format!("metrics {m:?}")
    })?;
    ensure(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!(
        "n={} tp={} tn={} accuracy=precision=recall=f1=1.0 in {secs:.2}s",
        test.len(),
        c.tp,
        c.tn
    ))
}

fn task1_fidelity(f: &Fixture) -> Outcome {
    let test = f.test_split(TaskLabel::Task1);
    let r = evaluate_engine(&f.kb, &f.router, &GroundedTemplateBackend, test);
    ensure(r.exact_match_accuracy == 1.0, || {
        format!("accuracy {}", r.exact_match_accuracy)
    })?;

    // Shift the start coordinate of one gene queried for its start position.
    let target = test
        .examples
        .iter()
        .find(|e| e.meta("attribute") == Some("start"))
        .and_then(|e| e.meta("gene"))
        .ok_or("no start query in the test split")?
        .to_string();
    let mut inputs = f.kb.to_inputs();
    let ann = inputs
        .annotations
        .iter_mut()
        .find(|a| a.symbol.as_str() == target)
        .ok_or("target gene has no annotation")?;
    ann.start += 1;
    let mutated = KnowledgeBase::build(inputs).map_err(|e| e.to_string())?;
    let m = evaluate_engine(&mutated, &f.router, &GroundedTemplateBackend, test);
    ensure(m.exact_match_accuracy < 1.0, || "mutation left accuracy at 1.0".into())?;
    Ok(format!(
        "n={} accuracy=1.0; start({target})+1 drops it to {:.4}",
        test.len(),
        m.exact_match_accuracy
    ))
}

fn corpus_counts(f: &Fixture) -> Outcome {
    let set = TemplateSet::standard();
    let t1 = generate(&f.kb, &set, TaskLabel::Task1, SEED).map_err(|e| e.to_string())?;
    ensure(t1.len() == 2160, || format!("Task 1 count {}", t1.len()))?;

    let genes = f.kb.seed_genes().len();
    let t2_templates = set.templates.iter().filter(|t| t.task == TaskLabel::Task2).count();
    let expected = genes * 13 * 2 * t2_templates;
    let t2 = generate(&f.kb, &set, TaskLabel::Task2, SEED).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("task2.jsonl");
    export_jsonl(&t2, &path).map_err(|e| e.to_string())?;
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(adgene_core::corpora::meta_path(&path)).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    ensure(meta["count"].as_u64() == Some(expected as u64), || {
        format!(
            "metadata count {} vs {genes}x13x2x{t2_templates}={expected}",
            meta["count"]
        )
    })?;
    ensure(expected == 11232, || {
        format!("expected 11232, formula gives {expected}")
    })?;

    let (train1, test1) = (&f.std_splits[&TaskLabel::Task1].0, f.test_split(TaskLabel::Task1));
    ensure(test1.len() == 216 && train1.len() == 1944, || {
        format!("Task 1 split {} / {}", train1.len(), test1.len())
    })?;
    for (t, (tr, te)) in &f.std_splits {
        let n = tr.len() + te.len();
        let want = (n as f64 * 0.1).round() as usize;
        ensure(te.len() == want, || format!("{t} test split {} of {n}", te.len()))?;
    }
    Ok(format!(
        "Task1={} Task2 metadata={expected} Task1 split=1944/216",
        t1.len()
    ))
}

struct RawOracle {
    genes: Vec<String>,
    /// (gene, region id) pairs with at least one significant QTL.
    assoc: BTreeSet<(String, String)>,
    /// Gene → AD-related flag, for genes with a molecular genetics record.
    ad: BTreeMap<String, bool>,
}

fn raw_oracle(dir: &Path) -> Result<RawOracle, String> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    let manifest: toml::Value = toml::from_str(&read(&dir.join("manifest.toml"))?).map_err(|e| e.to_string())?;
    let alpha = manifest["significance_alpha"]
        .as_float()
        .ok_or("manifest lacks alpha")?;

    let genes: Vec<String> = read(&dir.join("seed_genes.txt"))?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();

    let mut assoc = BTreeSet::new();
    for entry in std::fs::read_dir(dir.join("qtl")).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let region = name.split('.').next().unwrap().to_string();
        for line in read(&path)?.lines().skip(1) {
            let cols: Vec<&str> = line.split('\t').collect();
            let q: f64 = cols[2]
                .trim()
                .parse()
                .map_err(|_| format!("{name}: bad q `{}`", cols[2]))?;
            if q <= alpha {
                assoc.insert((cols[0].to_string(), region.clone()));
            }
        }
    }

    let mut ad = BTreeMap::new();
    for line in read(&dir.join("molecular_genetics.jsonl"))?.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        ad.insert(
            v["gene_symbol"].as_str().unwrap_or_default().to_string(),
            v["ad_related"] == true,
        );
    }
    Ok(RawOracle { genes, assoc, ad })
}

fn task4_logic(f: &Fixture) -> Outcome {
    let RawOracle { genes, assoc, ad } = raw_oracle(&common::fixtures().join("ad144"))?;
    ensure(genes.len() == 144, || format!("{} seed genes", genes.len()))?;
    let lexicon = Lexicon::new(&f.kb);
    let mut rows: BTreeMap<(bool, bool), usize> = BTreeMap::new();
    let mut disagreements = Vec::new();
    for gene in &genes {
        for region in BrainRegion::ALL {
            let q = format!(
                "Is the {} related to AD with regard to gene {gene}?",
                region.display_label()
            );
            let a = dispatch_with(&f.kb, &lexicon, &f.router, &GroundedTemplateBackend, &q);
            // A gene without a record has an unknown step 1, which cannot support a Yes.
            let step1 = ad.get(gene).map_or(Verdict::Unknown, |&b| Verdict::from_bool(b));
            let s1 = step1 == Verdict::Yes;
            let s2 = assoc.contains(&(gene.clone(), region.id().to_string()));
            let want = Verdict::from_bool(s1 && s2);
            let steps: Vec<Verdict> = a.reasoning_steps.iter().map(|s| s.verdict).collect();
            let steps_ok =
                steps.len() == 3 && steps[0] == step1 && steps[1] == Verdict::from_bool(s2) && steps[2] == want;
            if a.task != TaskLabel::Task4 || a.verdict != Some(want) || !steps_ok {
                disagreements.push(format!(
                    "{gene}/{}: {:?} {:?} {steps:?}",
                    region.id(),
                    a.task,
                    a.verdict
                ));
            }
            *rows.entry((s1, s2)).or_default() += 1;
        }
    }
    ensure(disagreements.is_empty(), || {
        format!("{} disagreements, first: {}", disagreements.len(), disagreements[0])
    })?;
    ensure(rows.len() == 4, || format!("truth table rows covered: {rows:?}"))?;
    Ok(format!(
        "{} pairs, 0 disagreements; rows (ad,region): {}",
        genes.len() * 13,
        rows.iter()
            .map(|((a, b), n)| format!("({a},{b})={n}"))
            .collect::<Vec<_>>()
            .join(" ")
    ))
}

fn routing_accuracy(router: &RouterModel, tests: &[&Corpus]) -> (usize, usize) {
    use adgene_core::router::QueryClassifier;
    tests
        .iter()
        .flat_map(|c| c.examples.iter())
        .fold((0, 0), |(hit, n), e| {
            (hit + usize::from(router.classify(&e.instruction).0 == e.task), n + 1)
        })
}

fn router_quality(f: &Fixture) -> Outcome {
    use adgene_core::router::QueryClassifier;
    let held_out: Vec<&Corpus> = f
        .std_splits
        .values()
        .chain(f.para_splits.values())
        .map(|(_, te)| te)
        .collect();
    let (hit, n) = routing_accuracy(&f.router, &held_out);
    let acc = hit as f64 / n as f64;
    ensure(acc >= 0.99, || format!("held-out accuracy {acc:.4} ({hit}/{n})"))?;
    let para_only: Vec<&Corpus> = f.para_splits.values().map(|(_, te)| te).collect();
    let (ph, pn) = routing_accuracy(&f.router, &para_only);
    ensure(ph as f64 / pn as f64 >= 0.99, || {
        format!("paraphrase held-out {ph}/{pn}")
    })?;

    let quoted = [
        ("What is the start position of GENEA?", TaskLabel::Task1),
        (
            "Does the gene GENEA contain variants in the hippocampus that significantly influence splicing regulation?",
            TaskLabel::Task2,
        ),
        (
            "Is the hippocampus related to AD with regard to gene GENEA?",
            TaskLabel::Task4,
        ),
    ];
    for (q, want) in quoted {
        let got = f.router.classify(q).0;
        ensure(got == want, || format!("`{q}` routed to {got}"))?;
    }

    // Informational: router that never saw a paraphrase template.
    let std_train: Vec<&Corpus> = f.std_splits.values().map(|(tr, _)| tr).collect();
    let (th, tn) = routing_accuracy(&train(&std_train), &para_only);
    Ok(format!(
        "held-out {hit}/{n} = {acc:.4}; paraphrase-only {ph}/{pn}; 3/3 quoted templates; \
         template-held-out (info only) {th}/{tn} = {:.4}",
        th as f64 / tn as f64
    ))
}

fn statistics_suite() -> Outcome {
    let r = paired_t_test(&[0.0, 0.0], &[1.0, 3.0]).map_err(|e| e.to_string())?;
    // df = 1 is the Cauchy distribution: p = 1 − (2/π)·atan|t|.
    let p_closed = 1.0 - 2.0 / std::f64::consts::PI * 2f64.atan();
    ensure((r.t - 2.0).abs() < 1e-12, || format!("t = {}", r.t))?;
    ensure((r.p_two_sided - 0.295167).abs() < 1e-5, || {
        format!("p = {}", r.p_two_sided)
    })?;
    ensure((r.p_two_sided - p_closed).abs() < 1e-9, || {
        format!("p {} vs closed form {p_closed}", r.p_two_sided)
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..40);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let t = paired_t_test(&a, &b).map_err(|e| e.to_string())?;
        let d = adgene_core::eval::cohens_d_paired(&a, &b, adgene_core::eval::CohenVariant::DiffSd)
            .map_err(|e| e.to_string())?;
        let err = (d * (n as f64).sqrt() - t.t).abs() / t.t.abs().max(1.0);
        worst = worst.max(err);
    }
    ensure(worst <= 1e-12, || format!("identity residual {worst:e}"))?;

    let crit = t_quantile(0.975, 1.0);
    let crit_closed = (0.475 * std::f64::consts::PI).tan();
    ensure((crit - 12.7062).abs() < 1e-3, || format!("critical value {crit}"))?;
    ensure((crit - crit_closed).abs() < 1e-6, || {
        format!("critical value {crit} vs tan(0.475π) {crit_closed}")
    })?;

    let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
    let b: Vec<f64> = (0..20).map(|i| (i * i % 7) as f64 + 1.5).collect();
    let r20 = paired_t_test(&a, &b).map_err(|e| e.to_string())?;
    ensure(r20.df == 19, || format!("df = {}", r20.df))?;
    Ok(format!(
        "t={} p={:.6} crit={crit:.4} identity residual<={worst:.1e} df(n=20)={}",
        r.t, r.p_two_sided, r20.df
    ))
}

fn random_spec(rng: &mut ChaCha8Rng, rank: u64) -> LoraLayerSpec {
    LoraLayerSpec {
        matrices: (0..rng.random_range(1..6))
            .map(|i| AdaptedMatrix {
                name: format!("m{i}"),
                rows: rng.random_range(1..5000),
                cols: rng.random_range(1..5000),
                count: rng.random_range(1..40),
            })
            .collect(),
        rank,
        base_param_total: 8_000_000_000,
    }
}

fn lora_accounting(f: &Fixture) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..500 {
        let r = rng.random_range(1..256);
        let a = random_spec(&mut rng, r);
        let b = random_spec(&mut rng, r);
        let count = |s: &LoraLayerSpec| lora_param_count(s).unwrap().added_params;
        ensure(count(&a.concat(&b)) == count(&a) + count(&b), || {
            "additivity violated".into()
        })?;
        let k = rng.random_range(1..8);
        ensure(count(&a.with_rank(r * k)) == k * count(&a), || {
            "linearity in r violated".into()
        })?;
    }
    let pct = REPORTED_LORA_PARAMS as f64 / REPORTED_BASE_PARAMS as f64 * 100.0;
    ensure((pct - 1.675).abs() <= 0.06, || format!("{pct}%"))?;

    // 32 layers × r=64 × Σ(rows+cols) over q,k,v,o,gate,up,down.
    let by_hand: u64 = 32 * 64 * ((4096 + 4096) * 2 + (4096 + 1024) * 2 + (4096 + 14336) * 3);
    let enumerated = lora_param_count(&llama31_8b_all_projections(64)).unwrap().added_params;
    ensure(enumerated == by_hand, || {
        format!("enumerated {enumerated} vs {by_hand}")
    })?;
    let report = build_report(&f.kb, &f.router, &GroundedTemplateBackend, &[], None);
    let want_delta = by_hand as i64 - 134_000_000;
    ensure(report.lora.delta_vs_reported == want_delta, || {
        format!("report delta {} vs {want_delta}", report.lora.delta_vs_reported)
    })?;
    Ok(format!(
        "additivity+linearity on 500 random specs; 134M/8B = {pct:.4}%; enumerated r=64 = {enumerated}, \
         report delta = {want_delta}"
    ))
}

fn determinism(f: &Fixture) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (t, (tr, _)) in f.std_splits.iter().chain(f.para_splits.iter()) {
        let path = dir.path().join(format!("{t}.jsonl"));
        export_jsonl(tr, &path).map_err(|e| e.to_string())?;
        let back = import_jsonl(&path).map_err(|e| e.to_string())?;
        ensure(&back == tr, || format!("{t} corpus changed through JSONL"))?;
    }

    let manifest = common::fixtures().join("ad144/manifest.toml");
    let rebuilt = Manifest::load(&manifest)
        .and_then(|m| m.read_dataset())
        .map_err(|e| e.to_string())?
        .build(None)
        .map_err(|e| e.to_string())?;
    let kb_path = dir.path().join("kb.snap");
    f.kb.save(&kb_path).map_err(|e| e.to_string())?;
    let reloaded = KnowledgeBase::load(&kb_path).map_err(|e| e.to_string())?;
    let hashes = [f.kb.snapshot_hash(), rebuilt.snapshot_hash(), reloaded.snapshot_hash()];
    ensure(hashes.iter().all(|h| h == &hashes[0]), || {
        format!("hashes differ: {hashes:?}")
    })?;

    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let queries = [
        "What is the start position of GENEA?",
        "Does the gene GENED contain variants in the putamen (basal ganglia) that significantly influence expression?",
        "Based on its molecular genetics summary, is GENEB potentially involved in Alzheimer's disease?",
        "Is the hippocampus related to AD with regard to gene GENEC?",
    ];
    let identical = rt.block_on(async {
        let scratch = tempfile::tempdir().unwrap();
        let st = common::state(common::config(scratch.path()));
        let mut ok = true;
        for q in queries {
            let first = common::query(&st, q).await;
            for _ in 0..3 {
                ok &= common::query(&st, q).await.bytes == first.bytes;
            }
            ok &= first.status == 200;
        }
        ok
    });
    ensure(identical, || {
        "/query responses differ between identical requests".into()
    })?;
    Ok(format!(
        "8 corpora round-trip; kb hash {}… stable over rebuild and reload; /query byte-identical",
        &hashes[0][..12]
    ))
}

fn no_secondary_component() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let members: Vec<String> = std::fs::read_dir(root.join("crates"))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    ensure(!members.iter().any(|m| m == "ui"), || {
        "a ui crate is part of the workspace".into()
    })?;
    ensure(!root.join("package.json").exists(), || {
        "a JavaScript package sits at the workspace root".into()
    })?;
    let mut sorted = members;
    sorted.sort();
    Ok(format!("workspace crates: {}; no ui build required", sorted.join(", ")))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let f = Fixture::load();
    let criteria: Vec<Criterion> = vec![
        ("task2_perfection", Box::new(|| task2_perfection(&f))),
        ("task1_lookup_fidelity", Box::new(|| task1_fidelity(&f))),
        ("corpus_counts", Box::new(|| corpus_counts(&f))),
        ("task4_logic", Box::new(|| task4_logic(&f))),
        ("router_quality", Box::new(|| router_quality(&f))),
        ("statistics_suite", Box::new(statistics_suite)),
        ("lora_accounting", Box::new(|| lora_accounting(&f))),
        ("determinism_and_round_trips", Box::new(|| determinism(&f))),
        ("no_secondary_component", Box::new(no_secondary_component)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
