//! Cross-checks the implicit oracles of a family against an explicit ball.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::families::{ball::ExplicitBall, Element, Family, Wall};
use crate::pocset::{
    bridge, in_interval, strongly_separated, super_strongly_separated, wall_relation, CubeComplex, HalfSpace, Sign,
    SuperSeparation, WallRelation,
};

/// Beyond this many vertices the median check samples triples instead of enumerating them.
const EXHAUSTIVE_MEDIAN_LIMIT: usize = 60;
const MEDIAN_SAMPLES: usize = 20_000;
const BRIDGE_INTERVAL_SAMPLES: usize = 40;

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub assertions: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        CheckResult {
            name,
            ..Default::default()
        }
    }

    fn assert(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.assertions += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub radius: usize,
    pub vertices: usize,
    pub edges: usize,
    pub wall_classes: usize,
    pub squares: usize,
    pub checks: Vec<CheckResult>,
    pub assertions: u64,
    pub passed: bool,
}

struct Ctx<'a> {
    family: &'a Family,
    ball: &'a ExplicitBall,
    dist: Vec<Vec<usize>>,
    walls: Vec<Wall>,
    /// Implicit sign of the far side of each class.
    far_sign: Vec<Sign>,
}

impl Ctx<'_> {
    fn v(&self, i: usize) -> &Element {
        &self.ball.vertices[i]
    }

    fn fmt(&self, i: usize) -> String {
        self.family.format_element(self.v(i))
    }

    /// Ball class whose representative edge lies within `r` of the center.
    fn classes_within(&self, r: usize) -> Vec<usize> {
        (0..self.walls.len())
            .filter(|&c| {
                let (p, q) = self.ball.class_edge[c];
                self.ball.depth[p].max(self.ball.depth[q]) <= r
            })
            .collect()
    }

    fn halfspace(&self, c: usize, far: bool) -> HalfSpace<Wall> {
        let s = self.far_sign[c];
        HalfSpace::new(self.walls[c].clone(), if far { s } else { s.flip() })
    }
}

/// Runs every oracle-equivalence check on the ball of `radius` around the basepoint.
pub fn validate(family: &Family, radius: usize, cap: usize, seed: u64) -> Result<ValidationReport> {
    let center = family.basepoint();
    let ball = ExplicitBall::new(family, &center, radius, cap)?;
    let dist: Vec<Vec<usize>> = (0..ball.len()).map(|i| ball.distances_from(i)).collect();
    let walls = ball.class_walls(family)?;
    let far_sign = (0..walls.len())
        .map(|c| family.side(&walls[c], &ball.vertices[ball.class_edge[c].1]))
        .collect();
    let ctx = Ctx {
        family,
        ball: &ball,
        dist,
        walls,
        far_sign,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let checks = vec![
        check_normal_form(&ctx),
        check_distance(&ctx),
        check_median(&ctx, &mut rng),
        check_sides(&ctx),
        check_relations(&ctx),
        check_interval_dimension(&ctx),
        check_bridges(&ctx, &mut rng)?,
    ];
    let assertions = checks.iter().map(|c| c.assertions).sum();
    let passed = checks.iter().all(|c| c.failures == 0);
    Ok(ValidationReport {
        radius,
        vertices: ball.len(),
        edges: ball.edges.len(),
        wall_classes: ball.class_count(),
        squares: ball.squares.len(),
        checks,
        assertions,
        passed,
    })
}

fn check_normal_form(ctx: &Ctx) -> CheckResult {
    let mut r = CheckResult::new("normal_form");
    let o = ctx.family.basepoint();
    for i in 0..ctx.ball.len() {
        let v = ctx.v(i);
        let again = ctx.family.parse_element(&ctx.family.format_element(v));
        r.assert(again.as_ref() == Ok(v), || format!("{} does not re-parse to itself", ctx.fmt(i)));
        r.assert(ctx.family.distance(&o, v) == ctx.ball.depth[i], || {
            format!("|{}| differs from its graph depth {}", ctx.fmt(i), ctx.ball.depth[i])
        });
    }
    r
}

fn check_distance(ctx: &Ctx) -> CheckResult {
    let mut r = CheckResult::new("distance");
    let n = ctx.ball.len();
    for i in 0..n {
        for j in 0..n {
            let d = ctx.family.distance(ctx.v(i), ctx.v(j));
            r.assert(d == ctx.dist[i][j], || {
                format!("d({}, {}) = {d}, graph says {}", ctx.fmt(i), ctx.fmt(j), ctx.dist[i][j])
            });
        }
    }
    r
}

fn check_median(ctx: &Ctx, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut r = CheckResult::new("median");
    let n = ctx.ball.len();
    let idx: Vec<usize> = (0..n).collect();
    let triples: Vec<[usize; 3]> = if n <= EXHAUSTIVE_MEDIAN_LIMIT {
        (0..n).flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| [a, b, c]))).collect()
    } else {
        (0..MEDIAN_SAMPLES)
            .map(|_| [*idx.choose(rng).unwrap(), *idx.choose(rng).unwrap(), *idx.choose(rng).unwrap()])
            .collect()
    };
    let d = &ctx.dist;
    for [a, b, c] in triples {
        let found: Vec<usize> = (0..n)
            .filter(|&z| {
                d[a][z] + d[z][b] == d[a][b] && d[b][z] + d[z][c] == d[b][c] && d[a][z] + d[z][c] == d[a][c]
            })
            .collect();
        let m = ctx.family.median(ctx.v(a), ctx.v(b), ctx.v(c));
        let perm = ctx.family.median(ctx.v(c), ctx.v(a), ctx.v(b));
        r.assert(m == perm, || format!("median of {} {} {} depends on argument order", ctx.fmt(a), ctx.fmt(b), ctx.fmt(c)));
        match found.as_slice() {
            [z] => r.assert(ctx.v(*z) == &m, || {
                format!("median of {} {} {}: brute force {}", ctx.fmt(a), ctx.fmt(b), ctx.fmt(c), ctx.fmt(*z))
            }),
            [] => r.assert(ctx.family.distance(&ctx.ball.center, &m) > ctx.ball.radius, || {
                format!("median of {} {} {} not found in the ball", ctx.fmt(a), ctx.fmt(b), ctx.fmt(c))
            }),
            _ => r.assert(false, || format!("{} medians for {} {} {}", found.len(), ctx.fmt(a), ctx.fmt(b), ctx.fmt(c))),
        }
    }
    r
}

fn check_sides(ctx: &Ctx) -> CheckResult {
    let mut r = CheckResult::new("side_and_parity");
    for (c, wall) in ctx.walls.iter().enumerate() {
        let (p, q) = ctx.family.dual_edge(wall);
        let edge_ok = ctx.family.side(wall, &p) == Sign::Minus && ctx.family.side(wall, &q) == Sign::Plus;
        r.assert(edge_ok, || format!("dual edge of {} is misoriented", ctx.family.format_wall(wall)));
        for v in 0..ctx.ball.len() {
            let s = ctx.family.side(wall, ctx.v(v));
            let expected = if ctx.ball.on_far_side(c, v) { ctx.far_sign[c] } else { ctx.far_sign[c].flip() };
            r.assert(s == expected, || format!("side of {} at {}", ctx.family.format_wall(wall), ctx.fmt(v)));
            let (dp, dq) = (ctx.family.distance(ctx.v(v), &p), ctx.family.distance(ctx.v(v), &q));
            r.assert(dp.abs_diff(dq) == 1 && (dp > dq) == (s == Sign::Plus), || {
                format!("parity of {} at {}", ctx.family.format_wall(wall), ctx.fmt(v))
            });
        }
    }
    r
}

fn check_relations(ctx: &Ctx) -> CheckResult {
    let mut r = CheckResult::new("wall_relation_and_transversality");
    let classes = ctx.classes_within(ctx.ball.radius / 2);
    for &c1 in &classes {
        for &c2 in &classes {
            let (w1, w2) = (&ctx.walls[c1], &ctx.walls[c2]);
            let square = ctx.ball.square_witness(c1, c2);
            r.assert(ctx.family.transverse(w1, w2) == square, || {
                format!("transversality of {} and {}", ctx.family.format_wall(w1), ctx.family.format_wall(w2))
            });
            for (f1, f2) in [(true, true), (true, false), (false, true), (false, false)] {
                let (h, k) = (ctx.halfspace(c1, f1), ctx.halfspace(c2, f2));
                let occupied = |a: bool, b: bool| ctx.ball.corner_occupied(c1, f1 == a, c2, f2 == b);
                let expected = if c1 == c2 {
                    if f1 == f2 { WallRelation::Equal } else { WallRelation::Complement }
                } else {
                    match (occupied(true, false), occupied(false, true), occupied(true, true), occupied(false, false)) {
                        (true, true, true, true) => WallRelation::Transverse,
                        (false, _, _, _) => WallRelation::HsubK,
                        (_, false, _, _) => WallRelation::KsubH,
                        (_, _, false, _) => WallRelation::HsubKstar,
                        (_, _, _, false) => WallRelation::KstarSubH,
                    }
                };
                let got = wall_relation(ctx.family, &h, &k);
                r.assert(got == expected, || {
                    format!(
                        "relation of {} and {}: {got:?}, corners say {expected:?}",
                        ctx.family.format_halfspace(&h),
                        ctx.family.format_halfspace(&k)
                    )
                });
            }
        }
    }
    r
}

fn max_pairwise_transverse(family: &Family, walls: &[Wall]) -> usize {
    fn grow(family: &Family, walls: &[Wall], chosen: &mut Vec<usize>, from: usize, best: &mut usize) {
        *best = (*best).max(chosen.len());
        for i in from..walls.len() {
            if chosen.iter().all(|&j| family.transverse(&walls[i], &walls[j])) {
                chosen.push(i);
                grow(family, walls, chosen, i + 1, best);
                chosen.pop();
            }
        }
    }
    let mut best = 0;
    grow(family, walls, &mut Vec::new(), 0, &mut best);
    best
}

fn check_interval_dimension(ctx: &Ctx) -> CheckResult {
    let mut r = CheckResult::new("interval_dimension");
    let dim = ctx.family.dimension();
    let c = 0;
    for v in 0..ctx.ball.len() {
        let walls: Vec<Wall> = ctx.family.separating_walls(ctx.v(c), ctx.v(v)).into_iter().map(|h| h.wall).collect();
        let mut distinct = walls.clone();
        distinct.sort();
        distinct.dedup();
        r.assert(walls.len() == ctx.dist[c][v] && distinct.len() == walls.len(), || {
            format!("separating walls of {} are not a distinct list of the right length", ctx.fmt(v))
        });
        let width = max_pairwise_transverse(ctx.family, &walls);
        r.assert(width <= dim, || format!("{width} pairwise transverse walls below {}", ctx.fmt(v)));
    }
    r
}

fn check_bridges(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut r = CheckResult::new("bridge");
    let n = ctx.ball.len();
    let classes = ctx.classes_within(ctx.ball.radius.div_ceil(2) + 1);
    for &c1 in &classes {
        for &c2 in &classes {
            for (f1, f2) in [(true, true), (true, false), (false, true), (false, false)] {
                let (h, k) = (ctx.halfspace(c1, f1), ctx.halfspace(c2, f2));
                if c1 == c2 || wall_relation(ctx.family, &h, &k) != WallRelation::HsubK {
                    continue;
                }
                if !strongly_separated(ctx.family, &h, &k)?.is_separated() {
                    continue;
                }
                let common = (0..ctx.walls.len())
                    .find(|&c3| ctx.ball.square_witness(c1, c3) && ctx.ball.square_witness(c2, c3));
                r.assert(common.is_none(), || {
                    format!(
                        "{} crosses both walls of a strongly separated pair",
                        ctx.family.format_wall(&ctx.walls[common.unwrap()])
                    )
                });
                let b = bridge(ctx.family, &h, &k)?;
                let (Some(p1), Some(p2)) = (ctx.ball.index_of(&b.p1), ctx.ball.index_of(&b.p2)) else {
                    continue;
                };
                let inside_h: Vec<usize> = (0..n).filter(|&v| ctx.ball.on_far_side(c1, v) == f1).collect();
                let outside_k: Vec<usize> = (0..n).filter(|&v| ctx.ball.on_far_side(c2, v) != f2).collect();
                let mut best = usize::MAX;
                let mut count = 0;
                for &x in &inside_h {
                    for &y in &outside_k {
                        match ctx.dist[x][y].cmp(&best) {
                            std::cmp::Ordering::Less => {
                                best = ctx.dist[x][y];
                                count = 1;
                            }
                            std::cmp::Ordering::Equal => count += 1,
                            _ => {}
                        }
                    }
                }
                let label = || format!("{} ⊂ {}", ctx.family.format_halfspace(&h), ctx.family.format_halfspace(&k));
                r.assert(best == b.length && count == 1 && ctx.dist[p1][p2] == b.length, || {
                    format!("bridge of {}: length {} vs brute force {best} ({count} pairs)", label(), b.length)
                });
                if !matches!(super_strongly_separated(ctx.family, &h, &k)?, SuperSeparation::Yes { .. }) {
                    continue;
                }
                for _ in 0..BRIDGE_INTERVAL_SAMPLES {
                    let (&x, &y) = (inside_h.choose(rng).unwrap(), outside_k.choose(rng).unwrap());
                    for z in 0..n {
                        if ctx.dist[x][z] + ctx.dist[z][y] != ctx.dist[x][y] {
                            continue;
                        }
                        // Only the part of the interval between the two walls hugs the bridge.
                        let between = ctx.ball.on_far_side(c1, z) != f1 && ctx.ball.on_far_side(c2, z) == f2;
                        if !between {
                            continue;
                        }
                        r.assert(in_interval(ctx.family, ctx.v(z), ctx.v(x), ctx.v(y)), || "interval mismatch".into());
                        let to_bridge = (ctx.dist[z][p1] + ctx.dist[z][p2] - b.length) / 2;
                        r.assert(to_bridge <= b.length, || {
                            format!("{} is {to_bridge} from the bridge of {}", ctx.fmt(z), label())
                        });
                    }
                }
            }
        }
    }
    Ok(r)
}
