//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use privset::feedback::FeedbackStore;
use privset::files::{bundled_questionnaire, bundled_schema, emit_schema, parse_schema};
use privset::service::{router, AppState};
use privset::snapshot;
use privset_core::coding::{build_feature_vector, Attribute, Ethnicity, FeatureProfile, NormalizationSpec, Trait};
use privset_core::dataset::{filter_satisfied, Dataset, RespondentRecord};
use privset_core::eval::SessionAssigner;
use privset_core::knn::{knn_recommend, nearest_neighbors, KnnConfig, RecommendationMode};
use privset_core::rng::SampleRng;
use privset_core::scoring::{score_ordinals, total_score, SettingsChoiceVector};
use privset_core::stats::{correlation_report, p_value};
use privset_core::synth::{synth_generate, SynthConfig};
use privset_core::SettingsSchema;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden_dataset(schema: &SettingsSchema) -> Dataset {
    snapshot::load(&fixture("synth_seed42_n451.json"), schema).expect("golden fixture loads")
}

fn uniform_choices(schema: &SettingsSchema, ordinal: usize) -> SettingsChoiceVector {
    SettingsChoiceVector::from_ordinals(schema, &vec![ordinal; schema.len()]).unwrap()
}

fn scoring_bounds() -> Outcome {
    let schema = bundled_schema();
    let most = total_score(&uniform_choices(&schema, 3), &schema).unwrap().value();
    let least = total_score(&uniform_choices(&schema, 0), &schema).unwrap().value();
    ensure((most - 10.0).abs() <= 1e-9, || format!("most private scored {most}"))?;
    ensure(least.abs() <= 1e-9, || format!("least private scored {least}"))?;
    Ok(format!("most={most}, least={least}"))
}

// Independent brute force: features computed from the raw codes, full sort
// by (distance, id), arithmetic mean of ordinals rounded half up.
fn oracle_features(age: u8, ethnicity: usize, concern: u8, neuroticism: u8) -> Vec<f64> {
    let mut v = vec![(f64::from(age) - 20.0) / 50.0];
    v.extend((0..5).map(|i| if i == ethnicity { 1.0 } else { 0.0 }));
    v.push(f64::from(concern) / 4.0);
    v.push((f64::from(neuroticism) - 4.0) / 16.0);
    v
}

fn record_ordinals(r: &RespondentRecord, schema: &SettingsSchema) -> Vec<usize> {
    schema
        .settings()
        .iter()
        .map(|s| {
            s.choices
                .iter()
                .position(|c| Some(c.id.as_str()) == r.choices.get(&s.id))
                .unwrap()
        })
        .collect()
}

fn brute_force(query: &[f64], data: &Dataset, schema: &SettingsSchema, k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, &RespondentRecord)> = data
        .records()
        .iter()
        .filter(|r| r.satisfaction > 0)
        .map(|r| {
            let eth = r.coded.ethnicity_onehot.iter().position(|b| *b == 1).unwrap();
            let f = oracle_features(r.coded.age_decade, eth, r.coded.concern, r.coded.traits.neuroticism);
            let d2: f64 = query.iter().zip(&f).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2.sqrt(), r)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.id.cmp(&b.1.id)));
    (0..schema.len())
        .map(|s| {
            let mean = all[..k]
                .iter()
                .map(|(_, r)| record_ordinals(r, schema)[s] as f64)
                .sum::<f64>()
                / k as f64;
            mean.round() as usize
        })
        .collect()
}

fn knn_oracle() -> Outcome {
    let schema = bundled_schema();
    let data = golden_dataset(&schema);
    let mut rng = SampleRng::seeded(20_240_101);
    for q in 0..100 {
        let age = [20u8, 30, 40, 50, 60, 70][rng.below(6) as usize];
        let eth = rng.below(5) as usize;
        let concern = rng.below(5) as u8;
        let neuro = 4 + rng.below(17) as u8;
        let profile = FeatureProfile {
            age_decade: age,
            ethnicity: Ethnicity::ALL[eth],
            concern,
            neuroticism: neuro,
        };
        let query = build_feature_vector(&profile, NormalizationSpec::default()).unwrap();
        let got = knn_recommend(&query, &data, &KnnConfig::default(), &schema)
            .map_err(|e| e.to_string())?
            .ordinals();
        let want = brute_force(&oracle_features(age, eth, concern, neuro), &data, &schema, 18);
        ensure(got == want, || format!("query {q} ({profile:?}): {got:?} vs {want:?}"))?;
    }
    Ok("100/100 queries agree".into())
}

fn composite_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Two-tailed t tail mass by quadrature after substituting x = √ν·tan θ.
fn quadrature_p(r: f64, n: usize) -> f64 {
    let nu = (n - 2) as f64;
    let t = r.abs() * (nu / (1.0 - r * r)).sqrt();
    let theta = (t / nu.sqrt()).atan();
    let f = move |x: f64| x.cos().powf(nu - 1.0);
    let half_pi = std::f64::consts::FRAC_PI_2;
    composite_simpson(&f, theta, half_pi, 200_000) / composite_simpson(&f, 0.0, half_pi, 200_000)
}

fn p_value_fidelity() -> Outcome {
    let p = p_value(0.27, 451).map_err(|e| e.to_string())?;
    ensure((1e-9..=1e-8).contains(&p), || format!("p(0.27, 451) = {p:e}"))?;
    let oracle = quadrature_p(0.27, 451);
    ensure((p - oracle).abs() <= 1e-10, || format!("{p:e} vs quadrature {oracle:e}"))?;
    for n in [3, 10, 451, 10_000] {
        let p0 = p_value(0.0, n).map_err(|e| e.to_string())?;
        ensure(p0 == 1.0, || format!("p(0, {n}) = {p0}"))?;
    }
    Ok(format!("p(0.27, 451) = {p:.4e}, quadrature {oracle:.4e}"))
}

fn sign_recovery() -> Outcome {
    let schema = bundled_schema();
    let data = synth_generate(&SynthConfig::reference(42, 451), &schema)
        .map_err(|e| e.to_string())?
        .dataset;
    let report = correlation_report(&data, &schema).map_err(|e| e.to_string())?;
    let expected = [
        (Attribute::Trait(Trait::Neuroticism), 1.0),
        (Attribute::Age, -1.0),
        (Attribute::Ethnicity(Ethnicity::White), -1.0),
        (Attribute::Ethnicity(Ethnicity::Asian), 1.0),
        (Attribute::Concern, 1.0),
    ];
    let mut summary = Vec::new();
    for (attr, sign) in expected {
        let c = report
            .get(attr)
            .and_then(|e| e.result())
            .ok_or_else(|| format!("{attr} not computed"))?;
        ensure(c.r * sign > 0.0 && c.p < 0.05, || format!("{attr}: r={:.3} p={:.2e}", c.r, c.p))?;
        summary.push(format!("{attr} {:+.3}", c.r));
    }
    let concern = report.get(Attribute::Concern).and_then(|e| e.result()).unwrap();
    ensure((concern.r - 0.27).abs() <= 0.10, || format!("concern r = {:.3}", concern.r))?;
    Ok(summary.join(", "))
}

fn filter_retention() -> Outcome {
    let schema = bundled_schema();
    let mut notes = Vec::new();
    for (seed, n) in [(42, 451), (7, 1000), (9, 5000)] {
        let d = synth_generate(&SynthConfig::reference(seed, n), &schema)
            .map_err(|e| e.to_string())?
            .dataset;
        let kept = filter_satisfied(&d, 0).len() as f64 / n as f64;
        ensure((kept - 0.845).abs() <= 0.005, || format!("n={n}: retained {kept:.4}"))?;
        notes.push(format!("n={n}: {:.2}%", 100.0 * kept));
    }
    Ok(notes.join(", "))
}

fn test_state(dataset: Dataset, seed: u64, dir: &Path) -> Arc<AppState> {
    Arc::new(AppState::new(
        Some(bundled_schema()),
        bundled_questionnaire(),
        Some(dataset),
        FeedbackStore::open(&dir.join("feedback.jsonl")).unwrap(),
        SessionAssigner::seeded(seed),
        KnnConfig::default(),
    ))
}

async fn call(state: &Arc<AppState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req.header("content-type", "application/json").body(Body::from(v.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn session_with_mode(state: &Arc<AppState>, mode: &str) -> String {
    loop {
        let (_, body) = call(state, "POST", "/api/session", None).await;
        let v: Value = serde_json::from_slice(&body).unwrap();
        if v["mode"] == mode {
            return v["session_id"].as_str().unwrap().to_string();
        }
    }
}

fn read_intake(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn popular_staticness() -> Outcome {
    let schema = bundled_schema();
    let dir = tempfile::tempdir().unwrap();
    let state = test_state(golden_dataset(&schema), 5, dir.path());
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let id = session_with_mode(&state, "popular").await;
        let mut bodies = Vec::new();
        for intake in ["intake_a.json", "intake_b.json"] {
            let (status, body) = call(
                &state,
                "POST",
                "/api/recommend",
                Some(json!({"session_id": id, "intake": read_intake(intake)})),
            )
            .await;
            ensure(status == StatusCode::OK, || format!("{intake}: status {status}"))?;
            bodies.push(body);
        }
        ensure(bodies[0] == bodies[1], || "popular bodies differ".into())?;
        Ok(format!("identical {}-byte bodies", bodies[0].len()))
    })
}

fn run_props<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn profile_strategy() -> impl Strategy<Value = FeatureProfile> {
    (0usize..6, 0usize..5, 0u8..=4, 4u8..=20).prop_map(|(a, e, c, n)| FeatureProfile {
        age_decade: [20, 30, 40, 50, 60, 70][a],
        ethnicity: Ethnicity::ALL[e],
        concern: c,
        neuroticism: n,
    })
}

fn property_suites() -> Outcome {
    let schema = bundled_schema();
    let data = golden_dataset(&schema);
    let mut passed = Vec::new();

    run_props("scoring linearity", 256, prop::collection::vec(0usize..4, 18), |ords| {
        let want: f64 = schema
            .settings()
            .iter()
            .zip(&ords)
            .map(|(s, o)| s.weight * s.choices[*o].grade)
            .sum();
        prop_assert!((score_ordinals(&schema, &ords).value() - want).abs() < 1e-9);
        Ok(())
    })?;
    run_props(
        "scoring monotonicity",
        256,
        (prop::collection::vec(0usize..4, 18), 0usize..18),
        |(ords, i)| {
            let mut up = ords.clone();
            up[i] = (up[i] + 1).min(3);
            prop_assert!(score_ordinals(&schema, &up).value() >= score_ordinals(&schema, &ords).value());
            Ok(())
        },
    )?;
    passed.push("scoring");

    run_props("knn permutation invariance", 32, (profile_strategy(), any::<u64>()), |(p, seed)| {
        let q = build_feature_vector(&p, NormalizationSpec::default()).unwrap();
        let mut records = data.records().to_vec();
        SampleRng::seeded(seed).shuffle(&mut records);
        let shuffled = Dataset::new(records, &schema, data.provenance().clone()).unwrap();
        let cfg = KnnConfig::default();
        prop_assert_eq!(
            knn_recommend(&q, &data, &cfg, &schema).unwrap(),
            knn_recommend(&q, &shuffled, &cfg, &schema).unwrap()
        );
        Ok(())
    })?;
    run_props("knn ordinal containment", 64, (profile_strategy(), 1usize..60), |(p, k)| {
        let q = build_feature_vector(&p, NormalizationSpec::default()).unwrap();
        let cfg = KnnConfig { k, ..KnnConfig::default() };
        let rec = knn_recommend(&q, &data, &cfg, &schema).unwrap();
        let neighbors = nearest_neighbors(&q, &data, &cfg).unwrap();
        for (s, got) in rec.ordinals().iter().enumerate() {
            let ords: Vec<usize> = neighbors.iter().map(|r| record_ordinals(r, &schema)[s]).collect();
            prop_assert!(ords.iter().min().unwrap() <= got && got <= ords.iter().max().unwrap());
        }
        Ok(())
    })?;
    passed.push("knn");

    run_props("filter idempotence/monotonicity", 64, (0u8..=4, 0u8..=4), |(a, b)| {
        let once = filter_satisfied(&data, a);
        prop_assert_eq!(&filter_satisfied(&once, a), &once);
        let (lo, hi) = (a.min(b), a.max(b));
        let loose = filter_satisfied(&data, lo);
        let strict = filter_satisfied(&data, hi);
        prop_assert!(strict.records().iter().all(|r| loose.records().contains(r)));
        Ok(())
    })?;
    passed.push("filter");

    run_props("snapshot round-trip", 16, (any::<u64>(), 0usize..120), |(seed, n)| {
        let d = synth_generate(&SynthConfig::reference(seed, n), &schema).unwrap().dataset;
        let bytes = snapshot::to_bytes(&d);
        let back = snapshot::from_bytes(&bytes, &schema).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(snapshot::to_bytes(&back), bytes);
        Ok(())
    })?;
    let reparsed = parse_schema(&emit_schema(&schema))?;
    ensure(reparsed == schema, || "schema round-trip differs".into())?;
    passed.push("round-trips");

    let mut assigner = SessionAssigner::seeded(2024);
    let knn = (0..10_000)
        .filter(|_| assigner.assign(0).mode == RecommendationMode::Knn)
        .count();
    ensure((4_800..=5_200).contains(&knn), || format!("knn share {knn}/10000"))?;
    passed.push("a/b balance");

    cli_service_identity(&data)?;
    passed.push("cli/service identity");

    Ok(format!("{} (knn share {:.2}%)", passed.join(", "), knn as f64 / 100.0))
}

fn cli_service_identity(data: &Dataset) -> Result<(), String> {
    let dir = tempfile::tempdir().unwrap();
    let state = test_state(data.clone(), 11, dir.path());
    let exe = env!("CARGO_BIN_EXE_privset");
    let snapshot_path = fixture("synth_seed42_n451.json");
    let cli = |args: &[&str]| {
        let o = std::process::Command::new(exe).args(args).output().unwrap();
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        Ok::<_, String>(o.stdout)
    };
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let (_, stats) = call(&state, "GET", "/api/stats", None).await;
        let doc = cli(&["analyze", "--format", "doc", "--data", snapshot_path.to_str().unwrap()])?;
        ensure(stats == doc, || "stats document differs from CLI analyze".into())?;
        for mode in ["knn", "popular"] {
            let id = session_with_mode(&state, mode).await;
            for intake in ["intake_a.json", "intake_b.json"] {
                let (_, body) = call(
                    &state,
                    "POST",
                    "/api/recommend",
                    Some(json!({"session_id": id, "intake": read_intake(intake)})),
                )
                .await;
                let out = cli(&[
                    "recommend",
                    "--data",
                    snapshot_path.to_str().unwrap(),
                    "--mode",
                    mode,
                    "--intake",
                    fixture(intake).to_str().unwrap(),
                ])?;
                ensure(body == out, || format!("{mode}/{intake}: CLI and service differ"))?;
            }
        }
        Ok(())
    })
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "scoring bounds", limit: Duration::from_secs(1), run: scoring_bounds },
        Criterion { name: "knn oracle equivalence", limit: Duration::from_secs(5), run: knn_oracle },
        Criterion { name: "p-value fidelity", limit: Duration::from_secs(1), run: p_value_fidelity },
        Criterion { name: "sign recovery", limit: Duration::from_secs(2), run: sign_recovery },
        Criterion { name: "filter retention", limit: Duration::from_secs(1), run: filter_retention },
        Criterion { name: "popular-mode staticness", limit: Duration::from_secs(5), run: popular_staticness },
        Criterion { name: "property suites", limit: Duration::from_secs(60), run: property_suites },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; took {elapsed:.2?}, limit {:?}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<24} {:>9.2?}  {detail}", c.name, elapsed),
            Err(why) => {
                failures += 1;
                println!("FAIL  {:<24} {:>9.2?}  {why}", c.name, elapsed);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
