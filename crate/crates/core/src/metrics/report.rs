use serde::{Deserialize, Serialize};

use super::{aei, assortativity, coleman, pairwise_aei, simpson, simpson_all_groups, GroupedGraphView};
use crate::annotate::{Stance, StanceNames, Topic};
use crate::graph::TopicNetwork;
use crate::groups::{group_composition, Partition, StanceGrouping};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Score neutral users as a third group in assortativity and Coleman.
    pub include_neutral: bool,
    /// Simpson over all three stance groups instead of the opposing pair.
    pub three_group_simpson: bool,
}

/// One row of the stance-metric table. Group A is the larger of the two
/// opposing stances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub topic: Topic,
    pub stance_a: String,
    pub stance_b: String,
    pub fraction_a: f64,
    pub fraction_neutral: f64,
    pub fraction_b: f64,
    pub simpson: Option<f64>,
    pub assortativity: Option<f64>,
    pub aei: Option<f64>,
    pub coleman_a: Option<f64>,
    pub coleman_b: Option<f64>,
    pub dominant_stance: String,
    pub coverage: f64,
}

pub fn metric_report(
    g: &TopicNetwork,
    s: &StanceGrouping,
    names: &StanceNames,
    opts: &MetricOptions,
) -> Result<MetricReport> {
    let counts = s.counts();
    let f =
        s.fractions().ok_or_else(|| Error::Precondition(format!("no labelled users in the {} network", g.topic)))?;
    let (a, b) = if counts[Stance::For.index()] >= counts[Stance::Against.index()] {
        (Stance::For, Stance::Against)
    } else {
        (Stance::Against, Stance::For)
    };
    let abn = [f[a.index()], f[Stance::Neutral.index()], f[b.index()]];
    let simpson = if opts.three_group_simpson { Some(simpson_all_groups(abn)?) } else { simpson(abn)? };

    let view = GroupedGraphView::from_stances(g, s, a, b, opts.include_neutral)?;
    let both = view.size(0) > 0 && view.size(1) > 0;
    let aei = if both { aei(&view, 0, 1)? } else { None };
    let coleman_a = if view.size(0) > 0 { coleman(&view, 0)? } else { None };
    let coleman_b = if view.size(1) > 0 { coleman(&view, 1)? } else { None };

    let mut dominant = Stance::For;
    for st in Stance::ALL {
        if counts[st.index()] > counts[dominant.index()] {
            dominant = st;
        }
    }
    Ok(MetricReport {
        topic: g.topic,
        stance_a: names.display(a).to_string(),
        stance_b: names.display(b).to_string(),
        fraction_a: abn[0],
        fraction_neutral: abn[1],
        fraction_b: abn[2],
        simpson,
        assortativity: assortativity(&view),
        aei,
        coleman_a,
        coleman_b,
        dominant_stance: names.display(dominant).to_string(),
        coverage: s.coverage,
    })
}

/// One row of the structural-group table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub topic: Topic,
    pub groups: usize,
    pub mean_aei: Option<f64>,
    pub max_aei: Option<f64>,
    pub min_aei: Option<f64>,
    pub max_dominant_share: Option<f64>,
    pub min_dominant_share: Option<f64>,
    pub dominant_stance: Option<String>,
}

pub fn structural_report(
    g: &TopicNetwork,
    p: &Partition,
    s: &StanceGrouping,
    names: &StanceNames,
) -> Result<StructuralReport> {
    let pairs = pairwise_aei(&GroupedGraphView::from_partition(g, p)?)?;
    let comp = group_composition(p, s)?;
    Ok(StructuralReport {
        topic: g.topic,
        groups: p.blocks,
        mean_aei: pairs.mean,
        max_aei: pairs.max,
        min_aei: pairs.min,
        max_dominant_share: comp.max_dominant_share,
        min_dominant_share: comp.min_dominant_share,
        dominant_stance: comp.dominant.map(|d| names.display(d).to_string()),
    })
}
