use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Training rows packed as bit words, one fixed-width slice per row.
pub(crate) struct RowMatrix {
    pub dim: usize,
    pub stride: usize,
    pub words: Vec<u64>,
}

impl RowMatrix {
    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.words[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn bit(&self, r: usize, f: usize) -> bool {
        self.words[r * self.stride + f / 64] >> (f % 64) & 1 == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf { label: bool },
    Split { feature: u32, zero: u32, one: u32 },
}

/// Binary CART tree over Boolean features; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn constant(label: bool) -> Self {
        Self {
            nodes: vec![Node::Leaf { label }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { zero, one, .. } => {
                    1 + go(nodes, zero as usize).max(go(nodes, one as usize))
                }
            }
        }
        go(&self.nodes, 0)
    }

    #[inline]
    pub fn predict_with(&self, bit: impl Fn(usize) -> bool) -> bool {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { label } => return label,
                Node::Split { feature, zero, one } => {
                    i = if bit(feature as usize) { one } else { zero } as usize;
                }
            }
        }
    }

    /// Grows a tree on rows with positive `weights` (bootstrap multiplicities).
    ///
    /// Splits minimise weighted Gini impurity among `mtry` randomly drawn
    /// features. A split that does not lower impurity is still taken as long
    /// as the feature separates the node, so growth only stops on pure nodes
    /// or rows that no feature tells apart. If none of the drawn features
    /// separates the node, further features are drawn one at a time.
    pub(crate) fn grow<R: Rng>(
        rows: &RowMatrix,
        labels: &[bool],
        weights: &[u32],
        mtry: usize,
        rng: &mut R,
    ) -> Self {
        let dim = rows.dim;
        let mut idx: Vec<u32> = (0..weights.len() as u32)
            .filter(|&r| weights[r as usize] > 0)
            .collect();
        let mut nodes = vec![Node::Leaf { label: false }];
        let mut stack = vec![(0usize, 0usize, idx.len())];
        let mut features: Vec<usize> = (0..dim).collect();
        let mut ones = vec![[0u64; 2]; dim];
        while let Some((node, lo, hi)) = stack.pop() {
            let mut total = [0u64; 2];
            for &r in &idx[lo..hi] {
                total[labels[r as usize] as usize] += weights[r as usize] as u64;
            }
            if total[0] == 0 || total[1] == 0 {
                nodes[node] = Node::Leaf {
                    label: total[1] > 0,
                };
                continue;
            }
            ones.iter_mut().for_each(|c| *c = [0; 2]);
            for &r in &idx[lo..hi] {
                let (r, w) = (r as usize, weights[r as usize] as u64);
                let l = labels[r] as usize;
                for (k, &word) in rows.row(r).iter().enumerate() {
                    let mut bits = word;
                    while bits != 0 {
                        let f = k * 64 + bits.trailing_zeros() as usize;
                        ones[f][l] += w;
                        bits &= bits - 1;
                    }
                }
            }
            let n = (total[0] + total[1]) as f64;
            features.shuffle(rng);
            let mut best: Option<(f64, usize)> = None;
            for (k, &f) in features.iter().enumerate() {
                if k >= mtry && best.is_some() {
                    break;
                }
                let one = ones[f];
                let zero = [total[0] - one[0], total[1] - one[1]];
                let n1 = one[0] + one[1];
                if n1 == 0 || n1 as f64 == n {
                    continue;
                }
                let score = gini_mass(zero) + gini_mass(one);
                if best.is_none_or(|(b, _)| score < b) {
                    best = Some((score, f));
                }
            }
            let Some((_, f)) = best else {
                nodes[node] = Node::Leaf {
                    label: total[1] > total[0],
                };
                continue;
            };
            let slice = &mut idx[lo..hi];
            let mut split = 0;
            for i in 0..slice.len() {
                if !rows.bit(slice[i] as usize, f) {
                    slice.swap(i, split);
                    split += 1;
                }
            }
            let zero_id = nodes.len();
            nodes.push(Node::Leaf { label: false });
            nodes.push(Node::Leaf { label: false });
            nodes[node] = Node::Split {
                feature: f as u32,
                zero: zero_id as u32,
                one: zero_id as u32 + 1,
            };
            stack.push((zero_id + 1, lo + split, hi));
            stack.push((zero_id, lo, lo + split));
        }
        Self { nodes }
    }
}

/// Gini impurity times node weight.
#[inline]
fn gini_mass(c: [u64; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (a, b) = (c[0] as f64, c[1] as f64);
    n - (a * a + b * b) / n
}
