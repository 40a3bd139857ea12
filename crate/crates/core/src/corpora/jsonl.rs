//! JSONL corpus files plus a `<path>.meta.json` sidecar.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, InstructionExample, SYSTEM_PROMPT};
use crate::task::TaskLabel;

/// Sidecar metadata written next to every exported corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub task: TaskLabel,
    pub count: usize,
    pub generation_seed: u64,
    pub template_ids: Vec<String>,
}

impl CorpusMeta {
    pub fn of(corpus: &Corpus) -> Self {
        let ids: BTreeSet<&str> = corpus.examples.iter().filter_map(|e| e.meta("template_id")).collect();
        Self {
            task: corpus.task,
            count: corpus.len(),
            generation_seed: corpus.generation_seed,
            template_ids: ids.into_iter().map(str::to_string).collect(),
        }
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_jsonl<W: Write>(examples: &[InstructionExample], mut out: W) -> std::io::Result<()> {
    for e in examples {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Strict reader: every line must be a complete example with the canonical
/// system prompt. Blank lines are skipped.
pub fn read_jsonl<R: Read>(input: R) -> Result<Vec<InstructionExample>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| CorpusError::Schema { line: i + 1, message };
        let example: InstructionExample = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        if example.system != SYSTEM_PROMPT {
            return Err(schema("system prompt differs from the canonical prompt".into()));
        }
        if !example.meta.contains_key("template_id") {
            return Err(schema("meta lacks template_id".into()));
        }
        out.push(example);
    }
    Ok(out)
}

pub fn export_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    write_jsonl(&corpus.examples, BufWriter::new(File::create(path)?))?;
    let mut meta = serde_json::to_vec_pretty(&CorpusMeta::of(corpus)).expect("meta serialises");
    meta.push(b'\n');
    std::fs::write(meta_path(path), meta)?;
    Ok(())
}

/// Reads a corpus and its sidecar. Without a sidecar the task is taken
/// from the first example and the seed defaults to 0.
pub fn import_jsonl(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let examples = read_jsonl(File::open(path)?)?;
    let sidecar = meta_path(path);
    let (task, seed) = if sidecar.exists() {
        let meta: CorpusMeta = serde_json::from_slice(&std::fs::read(&sidecar)?).map_err(|e| CorpusError::Schema {
            line: 0,
            message: format!("{}: {e}", sidecar.display()),
        })?;
        if meta.count != examples.len() {
            return Err(CorpusError::Schema {
                line: 0,
                message: format!("sidecar count {} but {} examples", meta.count, examples.len()),
            });
        }
        (meta.task, meta.generation_seed)
    } else {
        match examples.first() {
            Some(e) => (e.task, 0),
            None => {
                return Err(CorpusError::Schema {
                    line: 0,
                    message: "empty corpus without sidecar".into(),
                })
            }
        }
    };
    if let Some(pos) = examples.iter().position(|e| e.task != task) {
        return Err(CorpusError::Schema {
            line: pos + 1,
            message: format!("example task {} differs from corpus task {task}", examples[pos].task),
        });
    }
    Ok(Corpus {
        task,
        examples,
        generation_seed: seed,
    })
}
