//! End-to-end gap analysis of two corpora, report files and the merged
//! comparison table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::{self, GapOptions, GapResult, JsdMode, Metric, PairOptions, PairwiseContrast, TTestKind};
use crate::corpus::Corpus;
use crate::dynamics::{DtwOptions, TrajectoryMode};
use crate::error::{Error, Result};
use crate::lexicon::{CategoryLexicon, FeatureGroup, GroupBinding};
use crate::textdist::{AlphaNormalization, EmbeddingStore, EntrainmentOptions, WmdCache};

pub const REPORT_FORMAT: &str = "dyad-align-gap-report/1";

/// Every option that can change a metric value. Worker count is left out on
/// purpose: results do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub metrics: Vec<Metric>,
    pub k: usize,
    pub alpha_normalization: AlphaNormalization,
    pub jsd_mode: JsdMode,
    pub dtw_normalize: bool,
    pub trajectory_mode: TrajectoryMode,
    pub feature_epsilon: f64,
    pub ttest: TTestKind,
    pub contrast: PairwiseContrast,
    pub max_pairs: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let g = GapOptions::default();
        AnalysisConfig {
            metrics: Metric::ALL.to_vec(),
            k: g.entrainment.k,
            alpha_normalization: g.entrainment.alpha,
            jsd_mode: g.jsd_mode,
            dtw_normalize: g.dtw.normalize,
            trajectory_mode: g.trajectory_mode,
            feature_epsilon: g.feature_epsilon,
            ttest: g.ttest,
            contrast: g.contrast,
            max_pairs: None,
        }
    }
}

impl AnalysisConfig {
    pub fn gap_options(&self, seed: u64, workers: usize) -> GapOptions {
        GapOptions {
            jsd_mode: self.jsd_mode,
            entrainment: EntrainmentOptions {
                k: self.k,
                alpha: self.alpha_normalization,
            },
            dtw: DtwOptions {
                normalize: self.dtw_normalize,
            },
            trajectory_mode: self.trajectory_mode,
            feature_epsilon: self.feature_epsilon,
            ttest: self.ttest,
            contrast: self.contrast,
            pairs: PairOptions {
                workers,
                max_pairs: self.max_pairs,
                seed,
            },
        }
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a corpus in its normalized serialized form, so formatting of
/// the source file does not matter.
pub fn corpus_digest(corpus: &Corpus) -> Result<String> {
    Ok(sha256_hex(corpus.to_json_pretty()?.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub human_sha256: String,
    pub llm_sha256: String,
    pub lexicon: Option<String>,
    pub lexicon_sha256: Option<String>,
    pub binding_sha256: Option<String>,
    pub embeddings_sha256: Option<String>,
    pub seed: u64,
    pub config: AnalysisConfig,
    pub config_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedMetric {
    pub metric: Metric,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub format: String,
    pub human_label: String,
    pub llm_label: String,
    pub provenance: Provenance,
    pub results: Vec<GapResult>,
    pub skipped: Vec<SkippedMetric>,
    pub notes: Vec<String>,
}

/// Everything an analysis may read besides the two corpora.
#[derive(Clone, Copy, Default)]
pub struct Resources<'a> {
    pub lexicon: Option<&'a CategoryLexicon>,
    pub binding: Option<&'a GroupBinding>,
    pub embeddings: Option<&'a EmbeddingStore>,
    pub cache: Option<&'a WmdCache>,
}

pub fn analyze(
    human: &Corpus,
    llm: &Corpus,
    resources: Resources<'_>,
    config: &AnalysisConfig,
    seed: u64,
    workers: usize,
) -> Result<GapReport> {
    let opts = config.gap_options(seed, workers);
    let default_binding;
    let binding = match resources.binding {
        Some(b) => b,
        None => {
            default_binding = GroupBinding::default();
            &default_binding
        }
    };
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    let mut notes = Vec::new();
    let mut metrics = config.metrics.clone();
    metrics.sort();
    metrics.dedup();
    for metric in metrics {
        let outcome = match metric {
            Metric::LgIrp | Metric::LgDispute => match resources.lexicon {
                None => Err(Error::Lexicon("none supplied".into())),
                Some(lex) => {
                    let group = if metric == Metric::LgIrp { FeatureGroup::Irp } else { FeatureGroup::Dispute };
                    alignment::lg(human, llm, group, lex, binding, &opts)
                }
            },
            Metric::Leg => match resources.embeddings {
                None => Err(Error::Embeddings("none supplied".into())),
                Some(store) => alignment::leg(human, llm, store, &opts, resources.cache),
            },
            Metric::Atg => alignment::atg(human, llm, &opts),
            Metric::Amg => alignment::amg(human, llm, &opts),
            Metric::Sbg => alignment::sbg(human, llm, &opts),
        };
        match outcome {
            Ok(r) => {
                if r.excluded_human + r.excluded_llm > 0 {
                    notes.push(format!(
                        "{metric}: excluded {} human and {} LLM dialogue(s) lacking the required data",
                        r.excluded_human, r.excluded_llm
                    ));
                }
                results.push(r);
            }
            Err(e) => {
                log::warn!("{metric} skipped: {e}");
                skipped.push(SkippedMetric {
                    metric,
                    reason: e.to_string(),
                });
            }
        }
    }
    if results.iter().any(|r| r.metric == Metric::LgDispute) {
        notes.push("LG-Dispute: analytic, authentic and clout are open linear proxies, not the proprietary scores".into());
    }
    if resources.lexicon.is_some_and(|l| l.name == CategoryLexicon::demo().name) {
        notes.push("LG metrics use the bundled demo lexicon".into());
    }

    Ok(GapReport {
        format: REPORT_FORMAT.into(),
        human_label: human.label().into(),
        llm_label: llm.label().into(),
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            human_sha256: corpus_digest(human)?,
            llm_sha256: corpus_digest(llm)?,
            lexicon: resources.lexicon.map(|l| l.name.clone()),
            lexicon_sha256: resources.lexicon.map(|l| l.fingerprint()),
            binding_sha256: resources.lexicon.map(|_| binding.fingerprint()),
            embeddings_sha256: resources.embeddings.map(|s| s.fingerprint().to_string()),
            seed,
            config: config.clone(),
            config_sha256: config.hash(),
        },
        results,
        skipped,
        notes,
    })
}

impl GapReport {
    /// 0 when every selected metric ran, 2 when some were skipped.
    pub fn exit_code(&self) -> i32 {
        if self.skipped.is_empty() { 0 } else { 2 }
    }

    pub fn result(&self, metric: Metric) -> Option<&GapResult> {
        self.results.iter().find(|r| r.metric == metric)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let r: GapReport = serde_json::from_str(json)?;
        if r.format != REPORT_FORMAT {
            return Err(Error::Schema(format!("unsupported report format `{}`", r.format)));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// One row per metric with baseline, LLM-side mean, t, p and stars.
    pub fn to_table(&self) -> String {
        let header = ["Metric", "Gap", "Human", "LLM", "t", "p", "n(h)", "n(llm)"];
        let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        for r in &self.results {
            rows.push(vec![
                r.metric.heading().to_string(),
                format!("{:.3}{}", r.value, r.stars()),
                format!("{:.3}", r.human_baseline),
                format!("{:.3}", r.llm_mean),
                r.t_stat.map_or("n/a".into(), |t| format!("{t:.2}")),
                r.p_value.map_or("n/a".into(), format_p),
                r.samples_human.len().to_string(),
                r.samples_llm.len().to_string(),
            ]);
        }
        let mut out = format!("{} vs {} (human)\n", self.llm_label, self.human_label);
        out.push_str(&align(&rows));
        for s in &self.skipped {
            let _ = writeln!(out, "skipped {}: {}", s.metric.heading(), s.reason);
        }
        out.push_str("* p<.05, ** p<.01, *** p<.001 (independent t-test vs. human baseline)\n");
        out
    }
}

fn format_p(p: f64) -> String {
    if p < 0.001 { "<.001".into() } else { format!("{p:.3}") }
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn provenance_conflicts(a: &Provenance, b: &Provenance) -> Vec<String> {
    let mut out = Vec::new();
    let av = serde_json::to_value(&a.config).expect("config serializes");
    let bv = serde_json::to_value(&b.config).expect("config serializes");
    if let (Some(am), Some(bm)) = (av.as_object(), bv.as_object()) {
        for (k, x) in am {
            if k == "metrics" {
                continue;
            }
            let y = &bm[k];
            if x != y {
                out.push(format!("{k}: {x} vs {y}"));
            }
        }
    }
    let pairs = [
        ("human corpus", &a.human_sha256, &b.human_sha256),
    ];
    for (name, x, y) in pairs {
        if x != y {
            out.push(format!("{name} differs"));
        }
    }
    for (name, x, y) in [
        ("lexicon", &a.lexicon_sha256, &b.lexicon_sha256),
        ("feature binding", &a.binding_sha256, &b.binding_sha256),
        ("embeddings", &a.embeddings_sha256, &b.embeddings_sha256),
    ] {
        if let (Some(x), Some(y)) = (x, y) {
            if x != y {
                out.push(format!("{name} differs"));
            }
        }
    }
    out
}

/// Merges single-corpus reports into one comparison table: one row per
/// LLM corpus, the smallest gap per column in bold, and a human baseline
/// footer. Reports must share the human corpus and every metric option.
pub fn merge_reports(reports: &[GapReport]) -> Result<String> {
    let first = reports
        .first()
        .ok_or_else(|| Error::EmptyInput("no reports to merge".into()))?;
    for r in &reports[1..] {
        let conflicts = provenance_conflicts(&first.provenance, &r.provenance);
        if !conflicts.is_empty() {
            return Err(Error::IncompatibleReports(format!(
                "{} and {}: {}",
                first.llm_label,
                r.llm_label,
                conflicts.join("; ")
            )));
        }
    }
    let mins: BTreeMap<Metric, f64> = Metric::ALL
        .iter()
        .filter_map(|m| {
            reports
                .iter()
                .filter_map(|r| r.result(*m).map(|g| g.value))
                .reduce(f64::min)
                .map(|v| (*m, v))
        })
        .collect();
    let mut rows = vec![
        std::iter::once("Model".to_string())
            .chain(Metric::ALL.iter().map(|m| m.heading().to_string()))
            .collect::<Vec<_>>(),
    ];
    for r in reports {
        let mut row = vec![r.llm_label.clone()];
        for m in Metric::ALL {
            row.push(match r.result(m) {
                Some(g) => {
                    let cell = format!("{:.3}{}", g.value, g.stars());
                    if Some(&g.value) == mins.get(&m) {
                        format!("**{cell}**")
                    } else {
                        cell
                    }
                }
                None => "n/a".into(),
            });
        }
        rows.push(row);
    }
    let mut footer = vec![format!("Human baseline ({})", first.human_label)];
    for m in Metric::ALL {
        let baseline = reports.iter().find_map(|r| r.result(m)).map(|g| g.human_baseline);
        footer.push(baseline.map_or("n/a".into(), |b| format!("{b:.3}")));
    }
    rows.push(footer);
    let mut out = align(&rows);
    out.push_str("bold: smallest gap per column; * p<.05, ** p<.01, *** p<.001 (independent t-test vs. human baseline)\n");
    Ok(out)
}
