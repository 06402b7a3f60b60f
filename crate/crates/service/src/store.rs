//! On-disk metric and model store.
//!
//! Layout under the store root:
//!
//! ```text
//! manifest.txt
//! data/{matches,actions,appearances,players}.csv
//! metrics/<competition>__<season>.csv
//! audit/deltas.csv
//! models/<target>.model
//! ```
//!
//! Every file is plain text. The manifest records the tool version, the
//! dataset hash, the settings that produced derived files and a SHA-256 per
//! file; opening a store re-hashes the files and refuses a mismatch.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chemistry_core::datamodel::{
    parse_pair_metrics, write_pair_metrics, Dataset, PairSeasonMetrics, ACTIONS_FILE, APPEARANCES_FILE, MATCHES_FILE,
    PLAYERS_FILE,
};
use chemistry_core::jdi::{JdiConfig, OpponentDelta};
use chemistry_core::predict::{Target, TrainedPredictor};
use sha2::{Digest, Sha256};

use crate::error::{Result, ServiceError};

pub const STORE_FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const DATA_FILES: [&str; 4] = [MATCHES_FILE, ACTIONS_FILE, APPEARANCES_FILE, PLAYERS_FILE];

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn io_err(path: &Path, e: std::io::Error) -> ServiceError {
    ServiceError::Internal(format!("{}: {e}", path.display()))
}

/// Settings a model was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRecord {
    pub seed: u64,
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub format: u32,
    pub tool_version: String,
    pub dataset_sha256: String,
    pub jdi: Option<JdiConfig>,
    pub models: BTreeMap<Target, ModelRecord>,
    /// Relative path to SHA-256.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "chemistry-store {}", self.format);
        let _ = writeln!(s, "tool_version {}", self.tool_version);
        let _ = writeln!(s, "dataset_sha256 {}", self.dataset_sha256);
        if let Some(j) = &self.jdi {
            let _ = writeln!(
                s,
                "jdi raw_actual={} normalize_shares={} prior_minutes={}",
                j.raw_actual, j.normalize_shares, j.prior_threshold_minutes
            );
        }
        for (t, m) in &self.models {
            let _ = writeln!(
                s,
                "model {t} seed={} n_trees={} max_depth={} learning_rate={} min_minutes={}",
                m.seed, m.n_trees, m.max_depth, m.learning_rate, m.min_minutes
            );
        }
        for (path, hash) in &self.files {
            let _ = writeln!(s, "file {path} {hash}");
        }
        s
    }

    /// Hash that identifies the store contents in every response.
    pub fn hash(&self) -> String {
        sha256_hex(self.render().as_bytes())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| ServiceError::User(format!("{MANIFEST_FILE} line {line}: {msg}"));
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let settings = || -> BTreeMap<&str, &str> { rest.split(' ').filter_map(|kv| kv.split_once('=')).collect() };
            match key {
                "chemistry-store" => {
                    m.format = rest.parse().map_err(|_| bad(n, "bad format version"))?;
                    if m.format != STORE_FORMAT {
                        return Err(bad(n, &format!("unsupported store format {}", m.format)));
                    }
                }
                "tool_version" => m.tool_version = rest.to_string(),
                "dataset_sha256" => m.dataset_sha256 = rest.to_string(),
                "jdi" => {
                    let kv = settings();
                    let get = |k: &str| kv.get(k).copied().ok_or_else(|| bad(n, &format!("missing {k}")));
                    m.jdi = Some(JdiConfig {
                        raw_actual: get("raw_actual")?.parse().map_err(|_| bad(n, "raw_actual"))?,
                        normalize_shares: get("normalize_shares")?
                            .parse()
                            .map_err(|_| bad(n, "normalize_shares"))?,
                        prior_threshold_minutes: get("prior_minutes")?.parse().map_err(|_| bad(n, "prior_minutes"))?,
                    });
                }
                "model" => {
                    let (target, _) = rest.split_once(' ').ok_or_else(|| bad(n, "model line"))?;
                    let target: Target = target.parse().map_err(|e: String| bad(n, &e))?;
                    let kv = settings();
                    let get = |k: &str| kv.get(k).copied().ok_or_else(|| bad(n, &format!("missing {k}")));
                    m.models.insert(
                        target,
                        ModelRecord {
                            seed: get("seed")?.parse().map_err(|_| bad(n, "seed"))?,
                            n_trees: get("n_trees")?.parse().map_err(|_| bad(n, "n_trees"))?,
                            max_depth: get("max_depth")?.parse().map_err(|_| bad(n, "max_depth"))?,
                            learning_rate: get("learning_rate")?.parse().map_err(|_| bad(n, "learning_rate"))?,
                            min_minutes: get("min_minutes")?.parse().map_err(|_| bad(n, "min_minutes"))?,
                        },
                    );
                }
                "file" => {
                    let (path, hash) = rest.split_once(' ').ok_or_else(|| bad(n, "file line"))?;
                    m.files.insert(path.to_string(), hash.to_string());
                }
                "" => {}
                other => return Err(bad(n, &format!("unknown key `{other}`"))),
            }
        }
        if m.format == 0 {
            return Err(bad(1, "missing header"));
        }
        Ok(m)
    }
}

/// File name for one competition-season's metrics.
pub fn metrics_file_name(competition: &str, season: &str) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    c
                } else {
                    '-'
                }
            })
            .collect()
    };
    format!("metrics/{}__{}.csv", clean(competition), clean(season))
}

pub fn model_file_name(target: Target) -> String {
    format!("models/{target}.model")
}

const DELTAS_FILE: &str = "audit/deltas.csv";

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
    pub manifest: Manifest,
}

impl Store {
    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn write_file(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.manifest.files.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn remove_prefix(&mut self, prefix: &str) -> Result<()> {
        let dir = self.path(prefix);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        }
        self.manifest.files.retain(|k, _| !k.starts_with(&format!("{prefix}/")));
        Ok(())
    }

    fn save_manifest(&self) -> Result<()> {
        let path = self.path(MANIFEST_FILE);
        let tmp = self.path("manifest.txt.tmp");
        fs::write(&tmp, self.manifest.render()).map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))
    }

    /// Validates a raw dataset and copies it, in canonical form, into a
    /// fresh store. Anything previously derived in the store is discarded.
    pub fn ingest(root: &Path, data_dir: &Path) -> Result<Self> {
        let ds = Dataset::load(data_dir)?;
        fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        let mut store = Store {
            root: root.to_path_buf(),
            manifest: Manifest {
                format: STORE_FORMAT,
                tool_version: TOOL_VERSION.to_string(),
                ..Manifest::default()
            },
        };
        for prefix in ["data", "metrics", "audit", "models"] {
            store.remove_prefix(prefix)?;
        }
        let staging = store.path("data");
        ds.write(&staging)?;
        let mut dataset_hash = Sha256::new();
        for name in DATA_FILES {
            let rel = format!("data/{name}");
            let path = store.path(&rel);
            let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
            let h = sha256_hex(&bytes);
            dataset_hash.update(format!("{name} {h}\n").as_bytes());
            store.manifest.files.insert(rel, h);
        }
        store.manifest.dataset_sha256 = dataset_hash.finalize().iter().map(|b| format!("{b:02x}")).collect();
        store.save_manifest()?;
        Ok(store)
    }

    /// Opens an existing store and checks every file against the manifest.
    pub fn open(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|_| {
            ServiceError::User(format!("no store at {} (run `chemistry ingest` first)", root.display()))
        })?;
        let manifest = Manifest::parse(&text)?;
        for (rel, hash) in &manifest.files {
            let p = root.join(rel);
            let bytes = fs::read(&p).map_err(|_| ServiceError::User(format!("store file {rel} is missing")))?;
            if sha256_hex(&bytes) != *hash {
                return Err(ServiceError::User(format!(
                    "store file {rel} does not match the manifest"
                )));
            }
        }
        Ok(Store {
            root: root.to_path_buf(),
            manifest,
        })
    }

    pub fn dataset(&self) -> Result<Dataset> {
        Ok(Dataset::load(&self.path("data"))?)
    }

    /// Replaces all metrics (and with them any trained models).
    pub fn write_metrics(
        &mut self,
        metrics: &[PairSeasonMetrics],
        deltas: &BTreeMap<chemistry_core::datamodel::MatchId, Vec<OpponentDelta>>,
        cfg: &JdiConfig,
    ) -> Result<Vec<String>> {
        self.remove_prefix("metrics")?;
        self.remove_prefix("audit")?;
        self.remove_prefix("models")?;
        self.manifest.models.clear();
        let mut groups: BTreeMap<String, Vec<&PairSeasonMetrics>> = BTreeMap::new();
        for m in metrics {
            groups
                .entry(metrics_file_name(m.competition_id.as_str(), &m.season_label))
                .or_default()
                .push(m);
        }
        let mut written = Vec::new();
        for (rel, rows) in &groups {
            let mut buf = Vec::new();
            write_pair_metrics(&mut buf, rows.iter().copied())?;
            self.write_file(rel, &buf)?;
            written.push(rel.clone());
        }
        let mut audit =
            String::from("match_id,team_id,opponent_id,expected_oi90,actual_oi,minutes,actual_compared,delta\n");
        for ds in deltas.values() {
            for d in ds {
                let _ = writeln!(
                    audit,
                    "{},{},{},{},{},{},{},{}",
                    d.match_id, d.team_id, d.opponent, d.expected, d.actual_oi, d.minutes, d.actual_compared, d.delta
                );
            }
        }
        self.write_file(DELTAS_FILE, audit.as_bytes())?;
        self.manifest.jdi = Some(*cfg);
        self.save_manifest()?;
        Ok(written)
    }

    pub fn read_metrics(&self) -> Result<Vec<PairSeasonMetrics>> {
        let mut out = Vec::new();
        for rel in self.manifest.files.keys().filter(|k| k.starts_with("metrics/")) {
            let path = self.path(rel);
            let f = fs::File::open(&path).map_err(|e| io_err(&path, e))?;
            out.extend(parse_pair_metrics(f)?);
        }
        Ok(out)
    }

    pub fn has_metrics(&self) -> bool {
        self.manifest.jdi.is_some()
    }

    pub fn write_model(&mut self, predictor: &TrainedPredictor, record: ModelRecord) -> Result<()> {
        self.write_file(&model_file_name(predictor.target), predictor.dump().as_bytes())?;
        self.manifest.models.insert(predictor.target, record);
        self.save_manifest()
    }

    pub fn read_model(&self, target: Target) -> Result<Option<TrainedPredictor>> {
        let rel = model_file_name(target);
        if !self.manifest.files.contains_key(&rel) {
            return Ok(None);
        }
        let path = self.path(&rel);
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        Ok(Some(TrainedPredictor::load(&text)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let mut m = Manifest {
            format: STORE_FORMAT,
            tool_version: "0.1.0".to_string(),
            dataset_sha256: "ab".repeat(32),
            jdi: Some(JdiConfig::default()),
            ..Manifest::default()
        };
        m.models.insert(
            Target::Jdi90,
            ModelRecord {
                seed: 9,
                n_trees: 1000,
                max_depth: 5,
                learning_rate: 0.05,
                min_minutes: 700.0,
            },
        );
        m.files
            .insert("metrics/SYN__2016-2017.csv".to_string(), "cd".repeat(32));
        let back = Manifest::parse(&m.render()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.hash(), m.hash());
    }

    #[test]
    fn metrics_file_names_are_path_safe() {
        assert_eq!(metrics_file_name("SYN", "2016/2017"), "metrics/SYN__2016-2017.csv");
        assert_eq!(metrics_file_name("UEFA CL", "2018"), "metrics/UEFA-CL__2018.csv");
    }

    #[test]
    fn rejects_unknown_format() {
        assert!(Manifest::parse("chemistry-store 9\n").is_err());
        assert!(Manifest::parse("tool_version 1\n").is_err());
    }
}
