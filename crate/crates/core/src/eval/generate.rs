//! Synthetic line-based instances at the scale of the toy, grid and bahn
//! benchmark networks.

use std::collections::{HashMap, HashSet};

use petgraph::algo::{astar, min_spanning_tree};
use petgraph::data::Element;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ean::{Activity, ActivityKind, Event, EventKind, PeriodicEan};
use crate::io::Config;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Toy,
    Grid,
    Bahn,
}

impl InstanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InstanceKind::Toy => "toy",
            InstanceKind::Grid => "grid",
            InstanceKind::Bahn => "bahn",
        }
    }
}

impl std::str::FromStr for InstanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "toy" => Ok(InstanceKind::Toy),
            "grid" => Ok(InstanceKind::Grid),
            "bahn" => Ok(InstanceKind::Bahn),
            other => Err(format!("unknown instance kind '{other}' (toy, grid, bahn)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorParams {
    pub period: i64,
    /// Line corridors; each is served in both directions.
    pub corridors: usize,
    /// Minimum hops of a corridor.
    pub min_hops: usize,
    /// Range of drive lower bounds, minutes.
    pub drive_time: (i64, i64),
    /// Drive upper bound as a multiple of the lower bound (at least +1).
    pub drive_stretch: f64,
    pub wait_time: (i64, i64),
    pub change_time: (i64, i64),
    /// Passengers on drive/wait activities.
    pub dw_weight: (i64, i64),
    /// Passengers on a change activity.
    pub change_weight: (i64, i64),
    /// Probability that a compatible arrival/departure pair gets a change.
    pub change_prob: f64,
    pub sigma: f64,
    pub rho: f64,
    pub passenger_cutoff: f64,
}

impl GeneratorParams {
    pub fn for_kind(kind: InstanceKind) -> Self {
        let base = GeneratorParams {
            period: 60,
            corridors: 4,
            min_hops: 3,
            drive_time: (3, 8),
            drive_stretch: 1.5,
            wait_time: (1, 4),
            change_time: (2, 5),
            dw_weight: (10, 100),
            change_weight: (1, 30),
            change_prob: 0.5,
            sigma: 50.0,
            rho: 5.0,
            passenger_cutoff: 0.0,
        };
        match kind {
            InstanceKind::Toy => base,
            InstanceKind::Grid => GeneratorParams {
                corridors: 8,
                min_hops: 6,
                change_prob: 0.4,
                sigma: 100.0,
                passenger_cutoff: 10.0,
                ..base
            },
            InstanceKind::Bahn => GeneratorParams {
                corridors: 80,
                min_hops: 10,
                drive_time: (5, 45),
                change_prob: 0.05,
                sigma: 5000.0,
                rho: 10.0,
                passenger_cutoff: 300.0,
                dw_weight: (100, 3000),
                change_weight: (1, 600),
                ..base
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    /// Generator kind; `None` for instances read from disk.
    pub kind: Option<InstanceKind>,
    pub ean: PeriodicEan,
    pub config: Config,
}

struct Network {
    graph: UnGraph<(), i64>,
}

impl Network {
    fn ring(n: usize, rng: &mut ChaCha8Rng, drive: (i64, i64)) -> Self {
        let mut graph = UnGraph::new_undirected();
        let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
        for i in 0..n {
            graph.add_edge(nodes[i], nodes[(i + 1) % n], rng.random_range(drive.0..=drive.1));
        }
        Network { graph }
    }

    fn lattice(side: usize, rng: &mut ChaCha8Rng, drive: (i64, i64)) -> Self {
        let mut graph = UnGraph::new_undirected();
        let nodes: Vec<NodeIndex> = (0..side * side).map(|_| graph.add_node(())).collect();
        for r in 0..side {
            for c in 0..side {
                let v = nodes[r * side + c];
                if c + 1 < side {
                    graph.add_edge(v, nodes[r * side + c + 1], rng.random_range(drive.0..=drive.1));
                }
                if r + 1 < side {
                    graph.add_edge(v, nodes[(r + 1) * side + c], rng.random_range(drive.0..=drive.1));
                }
            }
        }
        Network { graph }
    }

    /// Euclidean spanning tree over random points plus the shortest extra
    /// edges up to `edges`; drive times scale with length.
    fn geometric(n: usize, edges: usize, rng: &mut ChaCha8Rng, drive: (i64, i64)) -> Self {
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        let dist = |a: usize, b: usize| ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
        let mut complete = UnGraph::<(), f64>::new_undirected();
        let nodes: Vec<NodeIndex> = (0..n).map(|_| complete.add_node(())).collect();
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                complete.add_edge(nodes[a], nodes[b], dist(a, b));
                pairs.push((dist(a, b), a, b));
            }
        }
        let mut chosen: HashSet<(usize, usize)> = HashSet::new();
        for el in min_spanning_tree(&complete) {
            if let Element::Edge { source, target, .. } = el {
                chosen.insert((source.min(target), source.max(target)));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        for &(_, a, b) in &pairs {
            if chosen.len() >= edges {
                break;
            }
            chosen.insert((a, b));
        }
        let longest = pairs.last().map_or(1.0, |p| p.0);
        let mut graph = UnGraph::new_undirected();
        let gn: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
        let mut chosen: Vec<_> = chosen.into_iter().collect();
        chosen.sort_unstable();
        for (a, b) in chosen {
            let frac = (dist(a, b) / longest * 4.0).min(1.0);
            let t = drive.0 + ((drive.1 - drive.0) as f64 * frac).round() as i64;
            graph.add_edge(gn[a], gn[b], t);
        }
        Network { graph }
    }

    fn route(&self, a: NodeIndex, b: NodeIndex) -> Option<Vec<NodeIndex>> {
        astar(&self.graph, a, |n| n == b, |e| *e.weight(), |_| 0).map(|(_, p)| p)
    }

    fn edge_time(&self, a: NodeIndex, b: NodeIndex) -> i64 {
        let e = self.graph.find_edge(a, b).expect("consecutive stops are adjacent");
        self.graph[e]
    }

    /// Corridors as fastest paths between sampled endpoints, preferring
    /// paths that cover edges no earlier corridor uses.
    fn corridors(&self, count: usize, min_hops: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<NodeIndex>> {
        let n = self.graph.node_count();
        let mut covered: HashSet<(usize, usize)> = HashSet::new();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut best: Option<(usize, usize, Vec<NodeIndex>)> = None;
            for _ in 0..40 {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if a == b {
                    continue;
                }
                let Some(path) = self.route(NodeIndex::new(a), NodeIndex::new(b)) else { continue };
                let hops = path.len() - 1;
                if hops < min_hops.min(n / 2) {
                    continue;
                }
                let fresh = path
                    .windows(2)
                    .filter(|w| !covered.contains(&key(w[0], w[1])))
                    .count();
                if best.as_ref().is_none_or(|(f, h, _)| (fresh, hops) > (*f, *h)) {
                    best = Some((fresh, hops, path));
                }
            }
            if let Some((_, _, path)) = best {
                covered.extend(path.windows(2).map(|w| key(w[0], w[1])));
                out.push(path);
            }
        }
        out
    }
}

fn key(a: NodeIndex, b: NodeIndex) -> (usize, usize) {
    (a.index().min(b.index()), a.index().max(b.index()))
}

/// Stop of a line at one station: arrival and/or departure event indices.
struct Stop {
    station: usize,
    arrival: Option<usize>,
    departure: Option<usize>,
}

/// Builds a line-based EAN with flow-consistent passenger weights: drive
/// weights are line loads, waits carry the through passengers, and change
/// weights are taken out of the alighting and boarding flows they connect.
pub fn generate_instance(kind: InstanceKind, params: &GeneratorParams, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = match kind {
        InstanceKind::Toy => Network::ring(8, &mut rng, params.drive_time),
        InstanceKind::Grid => Network::lattice(5, &mut rng, params.drive_time),
        InstanceKind::Bahn => Network::geometric(250, 326, &mut rng, params.drive_time),
    };
    let corridors = net.corridors(params.corridors, params.min_hops, &mut rng);

    let mut events: Vec<Event> = Vec::new();
    let mut activities: Vec<Activity> = Vec::new();
    let mut alight: Vec<i64> = Vec::new();
    let mut board: Vec<i64> = Vec::new();
    let mut lines: Vec<(usize, Vec<Stop>)> = Vec::new();
    let (wlo, whi) = params.dw_weight;

    for (c, corridor) in corridors.iter().enumerate() {
        for (dir, label) in [(false, "+"), (true, "-")] {
            let path: Vec<NodeIndex> = if dir {
                corridor.iter().rev().copied().collect()
            } else {
                corridor.clone()
            };
            let line = format!("{}{label}", c + 1);
            let mut stops = Vec::with_capacity(path.len());
            let mut push_event = |kind: EventKind, station: usize| {
                events.push(Event {
                    id: events.len() as u32 + 1,
                    kind,
                    station: format!("S{station}"),
                    line: line.clone(),
                    weight: 0.0,
                });
                alight.push(0);
                board.push(0);
                events.len() - 1
            };
            let mut path_events = Vec::with_capacity(path.len());
            for (m, &v) in path.iter().enumerate() {
                let station = v.index();
                let arrival = (m > 0).then(|| push_event(EventKind::Arrival, station));
                let departure = (m + 1 < path.len()).then(|| push_event(EventKind::Departure, station));
                path_events.push((station, arrival, departure));
            }
            let mut load = rng.random_range(wlo..=whi);
            for (station, arrival, departure) in path_events {
                match (arrival, departure) {
                    (None, Some(d)) => board[d] = load,
                    (Some(a), None) => alight[a] = load,
                    (Some(a), Some(d)) => {
                        let off = ((load - wlo) as f64 * rng.random_range(0.0..0.4)).round() as i64;
                        let through = load - off;
                        let on = rng.random_range(0..=(whi - through).max(0));
                        alight[a] = off;
                        board[d] = on;
                        let lower = rng.random_range(params.wait_time.0..=params.wait_time.1);
                        activities.push(Activity {
                            id: 0,
                            kind: ActivityKind::Wait,
                            source: a,
                            target: d,
                            lower,
                            upper: Some(lower + 3),
                            weight: through as f64,
                        });
                        load = through + on;
                    }
                    (None, None) => unreachable!("paths have at least two stops"),
                }
                stops.push(Stop {
                    station,
                    arrival,
                    departure,
                });
            }
            for w in stops.windows(2) {
                let (d, a) = (w[0].departure.unwrap(), w[1].arrival.unwrap());
                let lower = net.edge_time(NodeIndex::new(w[0].station), NodeIndex::new(w[1].station));
                let upper = ((lower as f64 * params.drive_stretch).round() as i64).max(lower + 1);
                activities.push(Activity {
                    id: 0,
                    kind: ActivityKind::Drive,
                    source: d,
                    target: a,
                    lower,
                    upper: Some(upper),
                    weight: 0.0,
                });
            }
            lines.push((c, stops));
        }
    }
    // Drive weights from the running load along each line.
    let mut drive_of_departure: HashMap<usize, usize> = HashMap::new();
    for (k, a) in activities.iter().enumerate() {
        if a.kind == ActivityKind::Drive {
            drive_of_departure.insert(a.source, k);
        }
    }
    for (_, stops) in &lines {
        let mut load = 0;
        for stop in stops {
            if let Some(a) = stop.arrival {
                load -= alight[a];
            }
            if let Some(d) = stop.departure {
                load += board[d];
                activities[drive_of_departure[&d]].weight = load as f64;
            }
        }
    }

    // Changes between lines of different corridors at shared stations.
    let mut at_station: HashMap<usize, (Vec<(usize, usize)>, Vec<(usize, usize)>)> = HashMap::new();
    for (c, stops) in &lines {
        for stop in stops {
            let entry = at_station.entry(stop.station).or_default();
            if let Some(a) = stop.arrival {
                entry.0.push((*c, a));
            }
            if let Some(d) = stop.departure {
                entry.1.push((*c, d));
            }
        }
    }
    let mut stations: Vec<usize> = at_station.keys().copied().collect();
    stations.sort_unstable();
    let (mut a_left, mut b_left) = (alight.clone(), board.clone());
    let (clo, chi) = params.change_weight;
    for station in stations {
        let (arrs, deps) = &at_station[&station];
        let mut pairs: Vec<(usize, usize)> = arrs
            .iter()
            .flat_map(|&(ca, a)| deps.iter().filter(move |&&(cd, _)| cd != ca).map(move |&(_, d)| (a, d)))
            .collect();
        pairs.shuffle(&mut rng);
        for (a, d) in pairs {
            if !rng.random_bool(params.change_prob) {
                continue;
            }
            let cap = a_left[a].min(b_left[d]);
            if cap < clo {
                continue;
            }
            let w = rng.random_range(clo..=chi).min(cap);
            a_left[a] -= w;
            b_left[d] -= w;
            activities.push(Activity {
                id: 0,
                kind: ActivityKind::Change,
                source: a,
                target: d,
                lower: rng.random_range(params.change_time.0..=params.change_time.1),
                upper: None,
                weight: w as f64,
            });
        }
    }
    // Arrival weight: passengers ending their trip; departure weight:
    // passengers starting it.
    for (i, e) in events.iter_mut().enumerate() {
        e.weight = match e.kind {
            EventKind::Arrival => a_left[i] as f64,
            EventKind::Departure => b_left[i] as f64,
        };
    }
    for (k, a) in activities.iter_mut().enumerate() {
        a.id = k as u32 + 1;
    }
    let ean = PeriodicEan::new(events, activities, params.period);
    let config = Config {
        period: params.period,
        sigma: params.sigma,
        rho: params.rho,
        passenger_cutoff: params.passenger_cutoff,
        seed,
        ..Config::default()
    };
    Instance {
        label: format!("{}-{seed}", kind.as_str()),
        kind: Some(kind),
        ean,
        config,
    }
}
