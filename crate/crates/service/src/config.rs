//! Service configuration: a TOML file plus `ADGPT_*` environment overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::StartupError;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    pub kb: PathBuf,
    pub router: PathBuf,
    #[serde(default = "default_backend")]
    pub backend: String,
    /// Replaces the threshold stored in the knowledge-base snapshot.
    #[serde(default)]
    pub significance_alpha: Option<f64>,
    /// One JSON object per request is appended here.
    #[serde(default)]
    pub request_log: Option<PathBuf>,
    /// Report served by `GET /report/latest`.
    #[serde(default)]
    pub report: Option<PathBuf>,
    /// Where `POST /corpus/build` writes its JSONL files.
    #[serde(default = "default_corpus_dir")]
    pub corpus_dir: PathBuf,
    /// Extra template sets by id, on top of `standard` and `paraphrases`.
    #[serde(default)]
    pub template_sets: BTreeMap<String, PathBuf>,
}

fn default_bind() -> String {
    DEFAULT_BIND.into()
}

fn default_backend() -> String {
    adgene_core::engines::GroundedTemplateBackend::NAME.into()
}

fn default_corpus_dir() -> PathBuf {
    PathBuf::from("corpora")
}

impl ServiceConfig {
    pub fn new(kb: impl Into<PathBuf>, router: impl Into<PathBuf>) -> Self {
        Self {
            bind: default_bind(),
            kb: kb.into(),
            router: router.into(),
            backend: default_backend(),
            significance_alpha: None,
            request_log: None,
            report: None,
            corpus_dir: default_corpus_dir(),
            template_sets: BTreeMap::new(),
        }
    }

    /// Relative paths in the file are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, StartupError> {
        let mut c: Self = toml::from_str(text).map_err(|e| StartupError::new("config_invalid", e.to_string()))?;
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut c.kb);
        rebase(&mut c.router);
        rebase(&mut c.corpus_dir);
        for p in [&mut c.request_log, &mut c.report].into_iter().flatten() {
            rebase(p);
        }
        for p in c.template_sets.values_mut() {
            rebase(p);
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StartupError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| StartupError::new("config_missing", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Applies `ADGPT_BIND`, `ADGPT_KB` and `ADGPT_ROUTER` from `lookup`.
    pub fn with_env(mut self, lookup: impl Fn(&str) -> Option<String>) -> Self {
        if let Some(v) = lookup("ADGPT_BIND") {
            self.bind = v;
        }
        if let Some(v) = lookup("ADGPT_KB") {
            self.kb = v.into();
        }
        if let Some(v) = lookup("ADGPT_ROUTER") {
            self.router = v.into();
        }
        self
    }
}
