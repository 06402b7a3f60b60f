#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chemistry_service::cli;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("chemistry").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert_eq!(o.code, 0, "{args:?} failed: {}", o.stderr);
    o.stdout
}

pub const GOLDEN_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

/// Every step of the batch pipeline on the synthetic league. Returns the
/// named artifacts that are compared against the golden files.
pub fn pipeline(dir: &Path) -> BTreeMap<String, String> {
    let raw = dir.join("raw");
    let store = dir.join("store");
    let report = dir.join("report");
    let (raw, store, report) = (raw.to_str().unwrap(), store.to_str().unwrap(), report.to_str().unwrap());
    let s = |rest: &[&str]| -> String {
        let mut args = vec!["--store", store];
        args.extend_from_slice(rest);
        ok(&args)
    };
    let mut out = BTreeMap::new();
    out.insert(
        "generate.txt".to_string(),
        ok(&["generate", "--out", raw, "--seed", "7"]),
    );
    out.insert("ingest.txt".to_string(), s(&["ingest", "--data-dir", raw]));
    out.insert("compute-metrics.txt".to_string(), s(&["compute-metrics"]));
    out.insert("train.txt".to_string(), s(&["train"]));
    out.insert("rank-pairs-joi90.csv".to_string(), s(&["rank-pairs"]));
    out.insert(
        "rank-pairs-jdi90.json".to_string(),
        s(&["rank-pairs", "--metric", "jdi90", "--min-minutes", "450", "--json"]),
    );
    out.insert("report.txt".to_string(), s(&["report", "--out", report]));
    for name in ["trends.csv", "edges.csv"] {
        out.insert(
            name.to_string(),
            std::fs::read_to_string(Path::new(report).join(name)).unwrap(),
        );
    }
    out.insert(
        "build-team.json".to_string(),
        s(&[
            "build-team",
            "--team",
            "T1",
            "--competition",
            "SYN",
            "--season",
            "2018/2019",
            "--exact",
            "--json",
        ]),
    );
    out.insert(
        "predict-pair.json".to_string(),
        s(&[
            "predict-pair",
            "T1P01",
            "T2P01",
            "--competition",
            "SYN",
            "--season",
            "2018/2019",
            "--json",
        ]),
    );
    out.insert(
        "manifest.txt".to_string(),
        std::fs::read_to_string(Path::new(store).join("manifest.txt")).unwrap(),
    );
    out
}

/// Differences between a pipeline run and the checked-in golden files.
/// With `UPDATE_GOLDEN=1` the golden files are rewritten instead.
pub fn golden_mismatches(artifacts: &BTreeMap<String, String>) -> Vec<String> {
    let dir = PathBuf::from(GOLDEN_DIR);
    if std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1") {
        std::fs::create_dir_all(&dir).unwrap();
        for (name, text) in artifacts {
            std::fs::write(dir.join(name), text).unwrap();
        }
        return Vec::new();
    }
    let mut bad = Vec::new();
    for (name, text) in artifacts {
        match std::fs::read_to_string(dir.join(name)) {
            Ok(golden) if golden == *text => {}
            Ok(_) => bad.push(format!("{name} differs")),
            Err(_) => bad.push(format!("{name} missing")),
        }
    }
    bad
}

/// A store with metrics and small models, for tests that only query it.
pub fn quick_store(dir: &Path) -> PathBuf {
    let raw = dir.join("raw");
    let store = dir.join("store");
    let (r, s) = (raw.to_str().unwrap(), store.to_str().unwrap());
    ok(&["generate", "--out", r]);
    ok(&["--store", s, "ingest", "--data-dir", r]);
    ok(&["--store", s, "compute-metrics"]);
    ok(&["--store", s, "train", "--n-trees", "40", "--max-depth", "3"]);
    store
}

pub mod api {
    use std::sync::Arc;

    use axum::body::Body;
    use axum::http::Request;
    use chemistry_service::engine::Engine;
    use chemistry_service::http::router;
    use http_body_util::BodyExt;
    use rand::seq::IndexedRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tower::ServiceExt;

    pub struct Client {
        engine: Arc<Engine>,
        rt: tokio::runtime::Runtime,
    }

    impl Client {
        pub fn new(store: &std::path::Path) -> Self {
            Self {
                engine: Arc::new(Engine::open(store).unwrap()),
                rt: tokio::runtime::Builder::new_multi_thread()
                    .enable_all()
                    .build()
                    .unwrap(),
            }
        }

        pub fn engine(&self) -> &Engine {
            &self.engine
        }

        pub fn send(&self, method: &str, uri: &str, body: Option<&str>) -> (u16, String) {
            let mut req = Request::builder().method(method).uri(uri);
            if body.is_some() {
                req = req.header("content-type", "application/json");
            }
            let req = req.body(Body::from(body.unwrap_or("").to_string())).unwrap();
            let app = router(self.engine.clone());
            self.rt.block_on(async {
                let resp = app.oneshot(req).await.unwrap();
                let status = resp.status().as_u16();
                let bytes = resp.into_body().collect().await.unwrap().to_bytes();
                (status, String::from_utf8(bytes.to_vec()).unwrap())
            })
        }

        pub fn get(&self, uri: &str) -> (u16, String) {
            self.send("GET", uri, None)
        }

        pub fn post(&self, uri: &str, body: &str) -> (u16, String) {
            self.send("POST", uri, Some(body))
        }
    }

    pub struct Query {
        pub cli: Vec<String>,
        pub method: &'static str,
        pub uri: String,
        pub body: Option<String>,
    }

    fn enc(s: &str) -> String {
        s.replace('/', "%2F").replace(' ', "%20")
    }

    /// Random equivalent CLI invocations and HTTP requests.
    pub fn random_queries(engine: &Engine, seed: u64, n: usize) -> Vec<Query> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = engine.dataset();
        let seasons: Vec<(String, String)> = ds
            .competition_seasons()
            .keys()
            .map(|(c, s)| (c.to_string(), s.clone()))
            .collect();
        let teams: Vec<String> = ["T1", "T2", "T3", "T4"].map(String::from).to_vec();
        let players: Vec<String> = ds.players.keys().map(|p| p.to_string()).collect();
        let mut out = Vec::new();
        for _ in 0..n {
            let mut cli: Vec<String> = Vec::new();
            let q = match rng.random_range(0..3) {
                0 => {
                    cli.push("rank-pairs".into());
                    cli.push("--json".into());
                    let mut params = Vec::new();
                    if rng.random_bool(0.5) {
                        let t = teams.choose(&mut rng).unwrap();
                        cli.extend(["--team".into(), t.clone()]);
                        params.push(format!("team={t}"));
                    }
                    if rng.random_bool(0.5) {
                        let (c, s) = seasons.choose(&mut rng).unwrap();
                        cli.extend(["--competition".into(), c.clone(), "--season".into(), s.clone()]);
                        params.push(format!("competition={c}"));
                        params.push(format!("season={}", enc(s)));
                    }
                    let metric = *["joi90", "jdi90"].choose(&mut rng).unwrap();
                    cli.extend(["--metric".into(), metric.into()]);
                    params.push(format!("metric={metric}"));
                    if rng.random_bool(0.7) {
                        let m = *["0", "450", "700", "899.5", "900", "1200"].choose(&mut rng).unwrap();
                        cli.extend(["--min-minutes".into(), m.into()]);
                        params.push(format!("min_minutes={m}"));
                    }
                    if rng.random_bool(0.5) {
                        let l = rng.random_range(1..25).to_string();
                        cli.extend(["--limit".into(), l.clone()]);
                        params.push(format!("limit={l}"));
                    }
                    Query {
                        cli,
                        method: "GET",
                        uri: format!("/pairs?{}", params.join("&")),
                        body: None,
                    }
                }
                1 => {
                    let a = players.choose(&mut rng).unwrap().clone();
                    let mut b = players.choose(&mut rng).unwrap().clone();
                    while b == a {
                        b = players.choose(&mut rng).unwrap().clone();
                    }
                    cli.extend(["predict-pair".into(), a.clone(), b.clone(), "--json".into()]);
                    let mut body = serde_json::json!({ "player_a": a, "player_b": b });
                    if rng.random_bool(0.5) {
                        let (c, s) = seasons.choose(&mut rng).unwrap();
                        cli.extend(["--competition".into(), c.clone(), "--season".into(), s.clone()]);
                        body["competition"] = c.clone().into();
                        body["season"] = s.clone().into();
                    }
                    Query {
                        cli,
                        method: "POST",
                        uri: "/predict".into(),
                        body: Some(body.to_string()),
                    }
                }
                _ => {
                    let t = teams.choose(&mut rng).unwrap().clone();
                    let (c, s) = seasons.choose(&mut rng).unwrap().clone();
                    let pool: Vec<String> = ds
                        .squad(&t.clone().into(), &c.clone().into(), &s)
                        .iter()
                        .map(|p| p.to_string())
                        .collect();
                    let alpha = *[0.0, 0.3, 0.5, 1.0].choose(&mut rng).unwrap();
                    let standardize = rng.random_bool(0.5);
                    let exact = rng.random_bool(0.5);
                    cli.extend([
                        "build-team".into(),
                        "--team".into(),
                        t,
                        "--competition".into(),
                        c.clone(),
                        "--season".into(),
                        s.clone(),
                        "--alpha".into(),
                        alpha.to_string(),
                        "--json".into(),
                    ]);
                    if standardize {
                        cli.push("--standardize".into());
                    }
                    if exact {
                        cli.push("--exact".into());
                    }
                    let body = serde_json::json!({
                        "pool": pool,
                        "competition": c,
                        "season": s,
                        "alpha": alpha,
                        "standardize": standardize,
                        "exact": exact,
                    });
                    Query {
                        cli,
                        method: "POST",
                        uri: "/team/build".into(),
                        body: Some(body.to_string()),
                    }
                }
            };
            out.push(q);
        }
        out
    }

    /// Runs a query both ways; `Err` describes a disagreement.
    pub fn compare(client: &Client, store: &std::path::Path, q: &Query) -> Result<(), String> {
        let mut args: Vec<&str> = vec!["--store", store.to_str().unwrap()];
        args.extend(q.cli.iter().map(String::as_str));
        let cli = super::run(&args);
        let (status, body) = client.send(q.method, &q.uri, q.body.as_deref());
        match (cli.code, status) {
            (0, 200) if cli.stdout.trim_end() == body => Ok(()),
            (1, 400 | 404 | 409) => Ok(()),
            _ => Err(format!(
                "{:?} vs {} {}: cli {} {:?} / http {status} {body}",
                q.cli, q.method, q.uri, cli.code, cli.stdout
            )),
        }
    }
}
