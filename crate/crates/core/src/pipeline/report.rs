use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::manifest::{Stage, StageManifest};
use super::stages::{
    AnnotateSummary, CrosstopicSummary, GraphSummary, IngestSummary, NamedJointTable, StanceRow, StructuralRow,
};
use crate::annotate::{theme_distribution, LabelKind, LabelStore, Stance, Theme};
use crate::crosstopic::{AlignmentMatrix, OverlapMatrix, TopicHypergraph};
use crate::graph::Interaction;
use crate::ingest::{ActionType, ActivityStats};
use crate::{Error, Result};

pub const ABSENT: &str = "--";

/// Rendered report files keyed by relative path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportBundle {
    pub files: BTreeMap<String, String>,
}

impl ReportBundle {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (name, text) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Two decimals, `--` when absent; negative zero prints as `0.00`.
pub fn fmt_index(v: Option<f64>) -> String {
    match v {
        None => ABSENT.into(),
        Some(x) if x.is_nan() => ABSENT.into(),
        Some(x) => {
            let s = format!("{x:.2}");
            if s == "-0.00" {
                "0.00".into()
            } else {
                s
            }
        }
    }
}

/// Thousands separators: `1,021,268,020`.
pub fn fmt_count(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn fmt_pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

fn md_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for r in rows {
        out.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    out
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 strings"))
}

fn csv_num(v: Option<f64>) -> String {
    v.map_or_else(|| ABSENT.into(), |x| format!("{x:.6}"))
}

struct Sources<'a> {
    run_dir: &'a Path,
    manifests: BTreeMap<Stage, &'a StageManifest>,
    used: BTreeMap<String, BTreeMap<String, String>>,
}

impl<'a> Sources<'a> {
    /// Reads a recorded artifact of `stage` and notes it under `section`.
    /// `Ok(None)` when the stage has no manifest or did not produce the file.
    fn read(&mut self, section: &str, stage: Stage, rel: &str) -> Option<String> {
        let m = self.manifests.get(&stage)?;
        let key = format!("{}/{rel}", stage.as_str());
        let hash = m.outputs.get(&key)?;
        let text = fs::read_to_string(self.run_dir.join(&key)).ok()?;
        self.used.entry(section.into()).or_default().insert(key, hash.clone());
        Some(text)
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, section: &str, stage: Stage, rel: &str) -> Result<Option<T>> {
        match self.read(section, stage, rel) {
            None => Ok(None),
            Some(text) => Ok(Some(serde_json::from_str(&text)?)),
        }
    }

    fn artifacts(&self, stage: Stage, prefix: &str) -> Vec<String> {
        self.manifests
            .get(&stage)
            .map(|m| {
                let p = format!("{}/{prefix}", stage.as_str());
                m.outputs.keys().filter_map(|k| k.strip_prefix(&p).map(str::to_string)).collect()
            })
            .unwrap_or_default()
    }
}

const ACRONYMS: [&str; 5] = ["ai", "dei", "la", "lgbtq", "us"];

/// `opposes_trump` to `Opposes Trump` for the markdown tables.
fn pretty_stance(name: &str) -> String {
    name.split(['_', ' '])
        .filter(|w| !w.is_empty())
        .map(|w| {
            if ACRONYMS.contains(&w) {
                w.to_uppercase()
            } else {
                let mut c = w.chars();
                c.next().map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn absent(what: &str) -> String {
    format!("_Section absent: {what}._\n")
}

#[derive(Serialize)]
struct Provenance<'a> {
    config_hash: Option<&'a str>,
    tool_version: Option<&'a str>,
    sections: &'a BTreeMap<String, BTreeMap<String, String>>,
}

/// Renders the report bundle from the recorded stage outputs.
///
/// Sections whose inputs are missing are marked absent; the bundle is
/// otherwise still complete. Output depends only on the artifacts, so equal
/// artifacts give byte-identical bundles.
pub fn render_report(run_dir: &Path, manifests: &[StageManifest]) -> Result<ReportBundle> {
    let mut src =
        Sources { run_dir, manifests: manifests.iter().map(|m| (m.stage, m)).collect(), used: BTreeMap::new() };
    let mut bundle = ReportBundle::default();
    let config_hash = manifests.first().map(|m| m.config_hash.as_str());
    let mut md = String::from("# Polarization report\n\n");
    if let Some(h) = config_hash {
        md.push_str(&format!("Config hash: `{h}`\n\n"));
    }

    md.push_str("## Activity\n\n");
    md.push_str(&activity_section(&mut src, &mut bundle)?);
    md.push_str("\n## Political themes\n\n");
    md.push_str(&theme_section(&mut src, &mut bundle)?);
    md.push_str("\n## Network properties\n\n");
    md.push_str(&network_section(&mut src, &mut bundle)?);
    md.push_str("\n## Stance-based polarization\n\n");
    md.push_str(&stance_section(&mut src, &mut bundle)?);
    md.push_str("\n## Structural groups\n\n");
    md.push_str(&structural_section(&mut src, &mut bundle)?);
    md.push_str("\n## Cross-topic structure\n\n");
    md.push_str(&crosstopic_section(&mut src, &mut bundle)?);

    bundle.files.insert("report.md".into(), md);
    let prov = Provenance {
        config_hash,
        tool_version: manifests.first().map(|m| m.tool_version.as_str()),
        sections: &src.used,
    };
    bundle.files.insert("provenance.json".into(), serde_json::to_string_pretty(&prov)? + "\n");
    Ok(bundle)
}

fn action_name(a: ActionType) -> &'static str {
    match a {
        ActionType::Likes => "Likes",
        ActionType::Posts => "Posts",
        ActionType::Reposts => "Reposts",
        ActionType::Blocks => "Blocks",
        ActionType::Follows => "Follows",
        ActionType::SignUps => "Sign-ups",
    }
}

fn activity_section(src: &mut Sources, bundle: &mut ReportBundle) -> Result<String> {
    let Some(stats) = src.json::<ActivityStats>("activity", Stage::Ingest, "activity.json")? else {
        return Ok(absent("no ingest outputs"));
    };
    let summary: Option<IngestSummary> = src.json("activity", Stage::Ingest, "summary.json")?;
    let mut md_rows = Vec::new();
    let mut csv_rows = Vec::new();
    for a in ActionType::ALL {
        let s = stats.get(a);
        md_rows.push(vec![
            action_name(a).into(),
            fmt_count(s.daily_average_actions.round() as u64),
            fmt_count(s.daily_average_authors.round() as u64),
            fmt_count(s.total_actions),
            fmt_count(s.total_author_days),
        ]);
        csv_rows.push(vec![
            a.as_str().into(),
            format!("{:.2}", s.daily_average_actions),
            format!("{:.2}", s.daily_average_authors),
            s.total_actions.to_string(),
            s.total_author_days.to_string(),
        ]);
    }
    bundle.files.insert(
        "activity.csv".into(),
        csv_text(
            &["action_type", "daily_average_actions", "daily_average_authors", "total_actions", "total_authors"],
            &csv_rows,
        )?,
    );
    let c = &stats.coverage;
    let mut md = md_table(
        &["Action Type", "Daily Avg. Actions", "Daily Avg. Authors", "Total Actions", "Total Authors"],
        &md_rows,
    );
    md.push_str(&format!(
        "\nWindow {} to {}: {} calendar days, {:.1} h downtime, {:.2} observed days. Authors are summed per-day distinct authors.\n",
        c.first_day.map_or_else(|| ABSENT.to_string(), |d| d.to_string()),
        c.last_day.map_or_else(|| ABSENT.to_string(), |d| d.to_string()),
        c.calendar_days,
        c.downtime_hours + 0.0,
        c.observed_days
    ));
    if let Some(s) = summary {
        md.push_str(&format!(
            "\n{} events read ({} malformed lines skipped); {} posts, {} after filtering, {} sampled.\n",
            fmt_count(s.events),
            fmt_count(s.malformed_lines),
            fmt_count(s.posts_total),
            fmt_count(s.posts_filtered),
            fmt_count(s.posts_sampled)
        ));
    }
    Ok(md)
}

fn theme_section(src: &mut Sources, bundle: &mut ReportBundle) -> Result<String> {
    let Some(text) = src.read("themes", Stage::Annotate, "themes.jsonl") else {
        return Ok(absent("no annotation outputs"));
    };
    let store = LabelStore::new(LabelKind::Theme);
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec = serde_json::from_str(line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        store.insert(rec)?;
    }
    let labels = store.themes();
    let summary: Option<AnnotateSummary> = src.json("themes", Stage::Annotate, "summary.json")?;
    if labels.is_empty() {
        return Ok(absent("no theme labels"));
    }
    let dist = theme_distribution(&labels)?;
    let np = dist.row(Theme::NonPolitical);
    let mut md_rows = vec![vec!["Apolitical".into(), fmt_pct(np.share_of_total), ABSENT.into(), fmt_count(np.count)]];
    let mut csv_rows =
        vec![vec!["Apolitical".into(), csv_num(Some(np.share_of_total)), ABSENT.into(), np.count.to_string()]];
    let political_pct = if dist.political > 0 { "100.0%".to_string() } else { ABSENT.into() };
    md_rows.push(vec![
        "Political".into(),
        fmt_pct(dist.political_share()),
        political_pct.clone(),
        fmt_count(dist.political),
    ]);
    csv_rows.push(vec![
        "Political".into(),
        csv_num(Some(dist.political_share())),
        if dist.political > 0 { csv_num(Some(1.0)) } else { ABSENT.into() },
        dist.political.to_string(),
    ]);
    for row in dist.political_rows() {
        md_rows.push(vec![
            format!("&nbsp;&nbsp;{}", row.theme),
            fmt_pct(row.share_of_total),
            row.share_of_political.map_or_else(|| ABSENT.into(), fmt_pct),
            fmt_count(row.count),
        ]);
        csv_rows.push(vec![
            row.theme.to_string(),
            csv_num(Some(row.share_of_total)),
            csv_num(row.share_of_political),
            row.count.to_string(),
        ]);
    }
    md_rows.push(vec!["Total".into(), "100.0%".into(), ABSENT.into(), fmt_count(dist.total)]);
    csv_rows.push(vec!["Total".into(), csv_num(Some(1.0)), ABSENT.into(), dist.total.to_string()]);
    bundle.files.insert(
        "themes.csv".into(),
        csv_text(&["category", "share_of_all", "share_of_political", "posts"], &csv_rows)?,
    );
    let mut md = md_table(&["Category", "% of All Posts", "% of Political Posts", "Number of Posts"], &md_rows);
    if dist.political == 0 {
        md.push_str("\nNo post was labelled political; the per-theme breakdown is empty.\n");
    }
    if let Some(s) = summary {
        let unlabeled = s.posts.saturating_sub(s.theme_labels);
        md.push_str(&format!(
            "\nProvider: {}. {} of {} posts carry a theme label; {} left unlabeled after retries.\n",
            s.provider,
            fmt_count(s.theme_labels),
            fmt_count(s.posts),
            fmt_count(unlabeled)
        ));
    }
    Ok(md)
}

fn network_section(src: &mut Sources, bundle: &mut ReportBundle) -> Result<String> {
    let Some(summaries) = src.json::<Vec<GraphSummary>>("networks", Stage::Graph, "summary.json")? else {
        return Ok(absent("no graph outputs"));
    };
    let mut md_rows = Vec::new();
    let mut csv_rows = Vec::new();
    for s in &summaries {
        let r = &s.layers[&Interaction::Reposts].stats;
        md_rows.push(vec![
            s.topic.to_string(),
            fmt_count(r.nodes),
            fmt_count(r.edges),
            fmt_index(Some(r.average_degree)),
        ]);
        csv_rows.push(vec![
            s.topic.slug().into(),
            r.nodes.to_string(),
            r.edges.to_string(),
            format!("{:.6}", r.average_degree),
        ]);
    }
    bundle.files.insert("networks.csv".into(), csv_text(&["topic", "nodes", "edges", "average_degree"], &csv_rows)?);
    let window = summaries.first().map(|s| s.window.clone()).unwrap_or_default();
    let mut md = md_table(&["Topic", "Number of Nodes", "Number of Edges", "Average Degree"], &md_rows);
    md.push_str(&format!("\nRepost layer, window {window}. Average degree is 2|E|/|V| with parallel edges counted.\n"));
    Ok(md)
}

fn stance_section(src: &mut Sources, bundle: &mut ReportBundle) -> Result<String> {
    let Some(rows) = src.json::<Vec<StanceRow>>("stance", Stage::Metrics, "stance.json")? else {
        return Ok(absent("no metric outputs"));
    };
    let mut md_rows = Vec::new();
    let mut csv_rows = Vec::new();
    let mut notes = String::new();
    for row in &rows {
        match &row.report {
            Some(r) => {
                md_rows.push(vec![
                    row.topic.to_string(),
                    fmt_index(Some(r.fraction_a)),
                    fmt_index(Some(r.fraction_neutral)),
                    fmt_index(Some(r.fraction_b)),
                    fmt_index(r.simpson),
                    fmt_index(r.assortativity),
                    fmt_index(r.aei),
                    fmt_index(r.coleman_a),
                    fmt_index(r.coleman_b),
                    pretty_stance(&r.dominant_stance),
                ]);
                csv_rows.push(vec![
                    row.topic.slug().into(),
                    csv_num(Some(r.fraction_a)),
                    csv_num(Some(r.fraction_neutral)),
                    csv_num(Some(r.fraction_b)),
                    csv_num(r.simpson),
                    csv_num(r.assortativity),
                    csv_num(r.aei),
                    csv_num(r.coleman_a),
                    csv_num(r.coleman_b),
                    r.dominant_stance.clone(),
                    r.stance_a.clone(),
                    r.stance_b.clone(),
                    csv_num(Some(r.coverage)),
                ]);
            }
            None => {
                let mut cells = vec![row.topic.to_string()];
                cells.extend(std::iter::repeat(ABSENT.to_string()).take(9));
                md_rows.push(cells);
                let mut cells = vec![row.topic.slug().to_string()];
                cells.extend(std::iter::repeat(ABSENT.to_string()).take(12));
                csv_rows.push(cells);
                if let Some(n) = &row.note {
                    notes.push_str(&format!("- {}: {n}\n", row.topic));
                }
            }
        }
    }
    bundle.files.insert(
        "stance_polarization.csv".into(),
        csv_text(
            &[
                "topic",
                "frac_a",
                "frac_neutral",
                "frac_b",
                "simpson",
                "assortativity",
                "aei",
                "coleman_a",
                "coleman_b",
                "dominant_stance",
                "stance_a",
                "stance_b",
                "coverage",
            ],
            &csv_rows,
        )?,
    );
    let mut md = md_table(
        &["Topic", "% A", "% Neutral", "% B", "Simpson", "Assort.", "AEI", "Col. A", "Col. B", "Dominant Stance"],
        &md_rows,
    );
    md.push_str("\nA is the larger of the two opposing stances, B the smaller.\n");
    if !notes.is_empty() {
        md.push('\n');
        md.push_str(&notes);
    }
    Ok(md)
}

fn structural_section(src: &mut Sources, bundle: &mut ReportBundle) -> Result<String> {
    let Some(rows) = src.json::<Vec<StructuralRow>>("structural", Stage::Metrics, "structural.json")? else {
        return Ok(absent("no metric outputs"));
    };
    let mut md_rows = Vec::new();
    let mut csv_rows = Vec::new();
    for row in &rows {
        // A single group has no between-group scores and no composition contrast.
        let (groups, r) = match &row.report {
            Some(r) if r.groups >= 2 => (r.groups.to_string(), Some(r)),
            Some(r) => (r.groups.to_string(), None),
            None => (ABSENT.to_string(), None),
        };
        let cells = [
            r.and_then(|r| r.mean_aei),
            r.and_then(|r| r.max_aei),
            r.and_then(|r| r.min_aei),
            r.and_then(|r| r.max_dominant_share),
            r.and_then(|r| r.min_dominant_share),
        ];
        let mut md = vec![row.topic.to_string()];
        md.extend(cells[..3].iter().map(|&v| fmt_index(v)));
        md.push(groups.clone());
        md.extend(cells[3..].iter().map(|&v| fmt_index(v)));
        md_rows.push(md);
        let mut c = vec![row.topic.slug().to_string()];
        c.extend(cells[..3].iter().map(|&v| csv_num(v)));
        c.push(groups);
        c.extend(cells[3..].iter().map(|&v| csv_num(v)));
        csv_rows.push(c);
    }
    bundle.files.insert(
        "structural_groups.csv".into(),
        csv_text(
            &["topic", "mean_aei", "max_aei", "min_aei", "groups", "max_dominant_share", "min_dominant_share"],
            &csv_rows,
        )?,
    );
    for name in src.artifacts(Stage::Metrics, "pairwise/") {
        if let Some(text) = src.read("structural", Stage::Metrics, &format!("pairwise/{name}")) {
            bundle.files.insert(format!("pairwise_aei/{name}"), text);
        }
    }
    let mut md = md_table(
        &["Topic", "Mean AEI", "Max. AEI", "Min. AEI", "Number of Groups", "Max. % DS", "Min. % DS"],
        &md_rows,
    );
    md.push_str("\n% DS is the share of a group's labelled users holding the globally dominant stance.\n");
    Ok(md)
}

fn matrix_md(labels: &[String], values: &[Vec<Option<f64>>]) -> String {
    let mut header = vec![""];
    header.extend(labels.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = labels
        .iter()
        .zip(values)
        .map(|(l, row)| std::iter::once(l.clone()).chain(row.iter().map(|&v| fmt_index(v))).collect())
        .collect();
    md_table(&header, &rows)
}

fn crosstopic_section(src: &mut Sources, bundle: &mut ReportBundle) -> Result<String> {
    let Some(summary) = src.json::<CrosstopicSummary>("crosstopic", Stage::Crosstopic, "summary.json")? else {
        return Ok(absent("no cross-topic outputs"));
    };
    let mut md = String::new();
    md.push_str("### User overlap (Jaccard)\n\n");
    match src.json::<OverlapMatrix>("crosstopic", Stage::Crosstopic, "overlap.json")? {
        Some(m) => {
            md.push_str(&matrix_md(&m.labels, &m.values));
            bundle.files.insert("overlap.csv".into(), m.to_csv());
        }
        None => md.push_str(&absent("fewer than two non-empty topic networks")),
    }
    md.push_str("\n### Topic bundles\n\n");
    match src.json::<TopicHypergraph>("crosstopic", Stage::Crosstopic, "hypergraph.json")? {
        Some(h) if !h.hyperedges.is_empty() => {
            let op = if h.strict { ">" } else { ">=" };
            md.push_str(&format!("Maximal cliques with pairwise overlap {op} {}:\n\n", h.threshold));
            let mut rows = Vec::new();
            for (i, e) in h.named_hyperedges().iter().enumerate() {
                md.push_str(&format!("- {{{}}}\n", e.join(", ")));
                rows.push(vec![(i + 1).to_string(), e.join(";")]);
            }
            bundle.files.insert("hypergraph.csv".into(), csv_text(&["hyperedge", "topics"], &rows)?);
        }
        Some(h) => {
            md.push_str(&format!("No pair of topics exceeds the {} threshold.\n", h.threshold));
            bundle.files.insert("hypergraph.csv".into(), csv_text(&["hyperedge", "topics"], &[])?);
        }
        None => md.push_str(&absent("no overlap matrix")),
    }
    for (file, title) in [
        ("alignment_content", "Issue alignment, content groups (NMI)"),
        ("alignment_structural", "Issue alignment, structural groups (NMI)"),
    ] {
        md.push_str(&format!("\n### {title}\n\n"));
        match src.json::<AlignmentMatrix>("crosstopic", Stage::Crosstopic, &format!("{file}.json"))? {
            Some(m) => {
                md.push_str(&matrix_md(&m.labels, &m.values));
                bundle.files.insert(format!("{file}.csv"), m.to_csv());
            }
            None => md.push_str(&absent("not enough topics with groupings")),
        }
    }
    md.push_str("\n### Joint stance distributions\n\n");
    let tables: Vec<NamedJointTable> = src.json("crosstopic", Stage::Crosstopic, "joint.json")?.unwrap_or_default();
    if tables.is_empty() {
        md.push_str(&absent("no user holds stances on two topics"));
    }
    for NamedJointTable { name, names_x, names_y, table: t } in &tables {
        if let Some(text) = src.read("crosstopic", Stage::Crosstopic, &format!("joint/{name}.csv")) {
            bundle.files.insert(format!("joint/{name}.csv"), text);
        }
        md.push_str(&format!("{} x {} ({} users)\n\n", t.topic_x, t.topic_y, fmt_count(t.users)));
        let header: Vec<String> = std::iter::once(format!("{} \\ {}", t.topic_x, t.topic_y))
            .chain(Stance::ALL.iter().map(|&s| pretty_stance(names_y.display(s))))
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = Stance::ALL
            .iter()
            .map(|&x| {
                std::iter::once(pretty_stance(names_x.display(x)))
                    .chain(Stance::ALL.iter().map(|&y| fmt_index(Some(t.cell(x, y)))))
                    .collect()
            })
            .collect();
        md.push_str(&md_table(&header, &rows));
        md.push('\n');
    }
    if !summary.notes.is_empty() {
        md.push_str("\nNotes:\n\n");
        for n in &summary.notes {
            md.push_str(&format!("- {n}\n"));
        }
    }
    Ok(md)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stance_names_read_as_titles() {
        assert_eq!(pretty_stance("opposes_trump"), "Opposes Trump");
        assert_eq!(pretty_stance("supports_lgbtq"), "Supports LGBTQ");
        assert_eq!(pretty_stance("neutral"), "Neutral");
    }

    #[test]
    fn number_formats() {
        assert_eq!(fmt_count(0), "0");
        assert_eq!(fmt_count(999), "999");
        assert_eq!(fmt_count(1000), "1,000");
        assert_eq!(fmt_count(1021268020), "1,021,268,020");
        assert_eq!(fmt_index(None), "--");
        assert_eq!(fmt_index(Some(-0.001)), "0.00");
        assert_eq!(fmt_index(Some(0.745)), "0.74");
        assert_eq!(fmt_index(Some(-0.5)), "-0.50");
    }

    #[test]
    fn empty_run_renders_absent_sections() {
        let dir = tempfile::tempdir().unwrap();
        let b = render_report(dir.path(), &[]).unwrap();
        let md = b.get("report.md").unwrap();
        assert_eq!(md.matches("_Section absent").count(), 6);
        assert!(b.get("provenance.json").is_some());
    }
}
