//! Stored fixtures that replay published table rows through the library.

use polarnet::annotate::{Stance, StanceLabel, StanceNames, Topic};
use polarnet::graph::{Interaction, TopicNetwork};
use polarnet::groups::{content_groups, Multigraph, Partition};
use polarnet::metrics::{simpson, structural_report};

const BLOCK: usize = 25;

/// Cross-block edge counts for each pair of the five blocks, in the order
/// (0,1) (0,2) (0,3) (0,4) (1,2) (1,3) (1,4) (2,3) (2,4) (3,4).
const CROSS_EDGES: [usize; 10] = [10, 133, 33, 40, 47, 51, 54, 58, 62, 69];

/// Supporters of the globally dominant stance per block.
const DOMINANT_PER_BLOCK: [usize; 5] = [20, 18, 16, 14, 12];

fn user(i: usize) -> String {
    format!("u{i:03}")
}

/// Five blocks of 25 users, each with internal density 1/2 and sparse cross
/// edges, and stance labels skewed so the dominant stance share per block
/// runs from 0.80 down to 0.48.
fn israel_palestine() -> (TopicNetwork, Vec<u32>, Vec<StanceLabel>) {
    let mut edges: Vec<(String, String)> = Vec::new();
    for b in 0..5 {
        for i in 0..BLOCK {
            for j in i + 1..BLOCK {
                edges.push((user(b * BLOCK + i), user(b * BLOCK + j)));
            }
        }
    }
    let pairs = (0..5).flat_map(|x| (x + 1..5).map(move |y| (x, y)));
    for ((x, y), &count) in pairs.zip(&CROSS_EDGES) {
        for k in 0..count {
            let (i, j) = (x * BLOCK + k % BLOCK, y * BLOCK + (k / BLOCK + k) % BLOCK);
            edges.push(if k % 2 == 0 { (user(i), user(j)) } else { (user(j), user(i)) });
        }
    }
    let g = TopicNetwork::from_named_edges(
        Topic::IsraelPalestine,
        "2024-12:2025-05".parse().unwrap(),
        Interaction::Reposts,
        edges.iter().map(|(s, t)| (s.as_str(), t.as_str(), 0)),
        [],
    );
    let blocks: Vec<u32> = (0..5 * BLOCK).map(|i| (i / BLOCK) as u32).collect();
    let mut labels = Vec::new();
    for (b, &dominant) in DOMINANT_PER_BLOCK.iter().enumerate() {
        for i in 0..BLOCK {
            let stance = if i < dominant {
                Stance::For
            } else if i % 2 == 0 {
                Stance::Neutral
            } else {
                Stance::Against
            };
            labels.push(StanceLabel { user: user(b * BLOCK + i), topic: Topic::IsraelPalestine, stance });
        }
    }
    (g, blocks, labels)
}

fn round2(x: Option<f64>) -> f64 {
    (x.expect("value present") * 100.0).round() / 100.0
}

#[test]
fn israel_palestine_structural_row() {
    let (g, blocks, labels) = israel_palestine();
    assert_eq!(g.node_count(), 125);
    let p = Partition::new(&Multigraph::from_network(&g, false), &blocks).unwrap();
    let s = content_groups(&labels, &g).unwrap();
    let names = StanceNames::new("supports_palestine", "supports_israel");
    let row = structural_report(&g, &p, &s, &names).unwrap();
    assert_eq!(row.groups, 5);
    assert_eq!(round2(row.mean_aei), 0.84);
    assert_eq!(round2(row.max_aei), 0.97);
    assert_eq!(round2(row.min_aei), 0.65);
    assert_eq!(round2(row.max_dominant_share), 0.80);
    assert_eq!(round2(row.min_dominant_share), 0.48);
    assert_eq!(row.dominant_stance.as_deref(), Some("supports_palestine"));
}

#[test]
fn trump_stance_fractions() {
    let counts = [(Stance::Against, 82), (Stance::Neutral, 17), (Stance::For, 1)];
    let mut labels = Vec::new();
    let mut users = Vec::new();
    for (stance, n) in counts {
        for _ in 0..n {
            let u = user(labels.len());
            labels.push(StanceLabel { user: u.clone(), topic: Topic::TrumpAdministration, stance });
            users.push(u);
        }
    }
    let g = TopicNetwork::from_named_edges(
        Topic::TrumpAdministration,
        "2024-12:2025-05".parse().unwrap(),
        Interaction::Reposts,
        users.windows(2).map(|w| (w[0].as_str(), w[1].as_str(), 0)),
        [],
    );
    let f = content_groups(&labels, &g).unwrap().fractions().unwrap();
    assert_eq!(f, [0.01, 0.17, 0.82]);
    // Ordered as [A, neutral, B] with A the larger opposing stance.
    assert_eq!(round2(simpson([f[2], f[1], f[0]]).unwrap()), 0.02);
}
