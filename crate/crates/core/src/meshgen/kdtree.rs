use nalgebra::Vector3;

const LEAF_SIZE: usize = 12;

/// Exact k-d tree over 3D points.
///
/// Query results are ordered by `(distance, index)`, so equidistant points
/// are reported deterministically.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vector3<f64>>,
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Sorted bounded candidate list for k-NN search.
struct Best {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl Best {
    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].0
        }
    }

    fn offer(&mut self, d: f64, i: usize) {
        if self.items.len() == self.k {
            let (wd, wi) = self.items[self.k - 1];
            if (d, i) >= (wd, wi) {
                return;
            }
            self.items.pop();
        }
        let pos = self.items.partition_point(|&(bd, bi)| (bd, bi) < (d, i));
        self.items.insert(pos, (d, i));
    }
}

impl KdTree {
    pub fn new(points: Vec<Vector3<f64>>) -> Self {
        let mut perm: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            let n = points.len();
            build(&points, &mut perm, 0, n, &mut nodes);
        }
        Self { points, perm, nodes }
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` nearest points to `q` as `(squared distance, index)`, nearest first.
    pub fn knn_with_distances(&self, q: &Vector3<f64>, k: usize) -> Vec<(f64, usize)> {
        let mut best = Best {
            k: k.min(self.len()),
            items: Vec::with_capacity(k + 1),
        };
        if best.k > 0 {
            self.search_knn(0, q, &mut best);
        }
        best.items
    }

    pub fn knn(&self, q: &Vector3<f64>, k: usize) -> Vec<usize> {
        self.knn_with_distances(q, k).into_iter().map(|(_, i)| i).collect()
    }

    pub fn nearest(&self, q: &Vector3<f64>) -> Option<(f64, usize)> {
        self.knn_with_distances(q, 1).first().map(|&(d, i)| (d.sqrt(), i))
    }

    /// All points within distance `r` of `q`, nearest first.
    pub fn within_radius(&self, q: &Vector3<f64>, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.is_empty() {
            self.search_radius(0, q, r * r, &mut out);
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out.into_iter().map(|(_, i)| i).collect()
    }

    fn search_knn(&self, node: usize, q: &Vector3<f64>, best: &mut Best) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.perm[start..end] {
                    best.offer((self.points[i] - q).norm_squared(), i);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search_knn(near, q, best);
                // equality must still be searched: an equidistant point with a smaller index wins
                if diff * diff <= best.worst() {
                    self.search_knn(far, q, best);
                }
            }
        }
    }

    fn search_radius(&self, node: usize, q: &Vector3<f64>, r2: f64, out: &mut Vec<(f64, usize)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.perm[start..end] {
                    let d = (self.points[i] - q).norm_squared();
                    if d <= r2 {
                        out.push((d, i));
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                if diff <= 0.0 || diff * diff <= r2 {
                    self.search_radius(left, q, r2, out);
                }
                if diff >= 0.0 || diff * diff <= r2 {
                    self.search_radius(right, q, r2, out);
                }
            }
        }
    }
}

fn build(points: &[Vector3<f64>], perm: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let slice = &mut perm[start..end];
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for &i in slice.iter() {
        lo = lo.inf(&points[i]);
        hi = hi.sup(&points[i]);
    }
    let axis = (hi - lo).imax();
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
    });
    let value = points[slice[mid]][axis];
    nodes.push(Node::Leaf { start, end });
    // left holds coordinates <= value, right holds coordinates >= value
    let left = build(points, perm, start, start + mid, nodes);
    let right = build(points, perm, start + mid, end, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}
