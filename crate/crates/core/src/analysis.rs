//! Experiment sweeps and the statistics behind the delay, hop-count,
//! degree and travel plots.
//!
//! Every realization draws its relays from its own ChaCha8 stream (see
//! [`crate::scenario`]), so results do not depend on thread count or
//! execution order; records are sorted before they are returned.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_digraph, degree_distribution};
use crate::link::{LinkParams, Node, RadioProfile};
use crate::routing::{self, Scheme};
use crate::scenario::{self, SyntheticConfig, Trajectories};

/// One scheme's outcome on one realization. `total_delay` and `hop_count`
/// are both absent when the scheme found no route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub realization: u64,
    pub n_intermediate: usize,
    #[serde(rename = "file_size_bits")]
    pub file_size: f64,
    pub scheme: Scheme,
    #[serde(rename = "total_delay_s")]
    pub total_delay: Option<f64>,
    pub hop_count: Option<usize>,
    /// Comma-joined node ids, where the route runs over real nodes.
    pub route: Option<String>,
}

impl SweepRecord {
    fn unrouted(realization: u64, n_intermediate: usize, file_size: f64, scheme: Scheme) -> Self {
        Self {
            realization,
            n_intermediate,
            file_size,
            scheme,
            total_delay: None,
            hop_count: None,
            route: None,
        }
    }

    fn routed(mut self, delay: f64, hops: usize, route: Option<String>) -> Self {
        self.total_delay = Some(delay);
        self.hop_count = Some(hops);
        self.route = route;
        self
    }
}

pub const SWEEP_CSV_HEADER: [&str; 7] =
    ["realization", "n_intermediate", "file_size_bits", "scheme", "total_delay_s", "hop_count", "route"];

/// All three schemes on one realization of `cfg` (with its own `n_intermediate`).
pub fn evaluate_realization(
    cfg: &SyntheticConfig,
    realization: u64,
    file_sizes: &[f64],
) -> Result<Vec<SweepRecord>> {
    let sc = scenario::generate_realization(cfg, realization)?;
    let (src, dst) = (sc.source()?.clone(), sc.target()?.clone());
    let sat = sc.satellites()?.first().map(|&n| n.clone());
    let n = cfg.n_intermediate;
    let mut out = Vec::with_capacity(3 * file_sizes.len());
    for &bits in file_sizes {
        let p = cfg.params.with_file_size(bits);
        let g = build_digraph(sc.nodes.clone(), &p)?;
        let (s, d) = (g.lookup(&sc.source_id)?, g.lookup(&sc.target_id)?);

        let blank = |scheme| SweepRecord::unrouted(realization, n, bits, scheme);
        out.push(match routing::shortest_path(&g, s, d)? {
            Some(r) => blank(Scheme::Proposed).routed(r.total_delay, r.hop_count(), Some(r.hop_ids(&g))),
            None => blank(Scheme::Proposed),
        });

        let chain = routing::scheme_ideal_relay_chain(&src, &dst, &p, cfg.relay_chain_hops)?;
        out.push(blank(Scheme::IdealRelayChain).routed(chain.delay, chain.hop_count, None));

        let via_sat = match &sat {
            Some(sat) => routing::scheme_satellite_only(&src, sat, &dst, &p)?
                .map(|r| (r, format!("{},{},{}", src.id, sat.id, dst.id))),
            None => None,
        };
        out.push(match via_sat {
            Some((r, ids)) => blank(Scheme::SatelliteOnly).routed(r.delay, r.hop_count, Some(ids)),
            None => blank(Scheme::SatelliteOnly),
        });
    }
    Ok(out)
}

/// Every scheme for every `(N_i, L, realization)`, sorted by
/// `(n_intermediate, file_size, realization, scheme)`.
pub fn run_sweep(
    base: &SyntheticConfig,
    n_list: &[usize],
    file_sizes: &[f64],
    realizations: u64,
) -> Result<Vec<SweepRecord>> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("realizations must be >= 1".into()));
    }
    if let Some(bad) = file_sizes.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::InvalidArgument(format!("file size {bad} must be finite and >= 0")));
    }
    base.validate()?;
    let jobs: Vec<(usize, u64)> =
        n_list.iter().flat_map(|&n| (0..realizations).map(move |r| (n, r))).collect();
    let chunks = jobs
        .par_iter()
        .map(|&(n, r)| {
            let cfg = SyntheticConfig { n_intermediate: n, ..base.clone() };
            evaluate_realization(&cfg, r, file_sizes)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<SweepRecord> = chunks.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        a.n_intermediate
            .cmp(&b.n_intermediate)
            .then(a.file_size.total_cmp(&b.file_size))
            .then(a.realization.cmp(&b.realization))
            .then(a.scheme.cmp(&b.scheme))
    });
    Ok(records)
}

/// Per `(N_i, L, scheme)` averages over realizations that found a route.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub n_intermediate: usize,
    pub file_size: f64,
    pub scheme: Scheme,
    pub realizations: usize,
    pub routed: usize,
    /// `None` when nothing was routed.
    pub mean_delay: Option<f64>,
    pub mean_hops: Option<f64>,
}

pub fn summarize(records: &[SweepRecord]) -> Vec<SweepSummary> {
    let mut groups: BTreeMap<(usize, u64, Scheme), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        // f64 bits order matches numeric order for the non-negative sizes a sweep accepts
        groups.entry((r.n_intermediate, r.file_size.to_bits(), r.scheme)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((n, bits, scheme), rs)| {
            let routed: Vec<_> = rs.iter().filter(|r| r.total_delay.is_some()).collect();
            let k = routed.len();
            let mean = |f: &dyn Fn(&SweepRecord) -> f64| {
                (k > 0).then(|| routed.iter().map(|r| f(r)).sum::<f64>() / k as f64)
            };
            SweepSummary {
                n_intermediate: n,
                file_size: f64::from_bits(bits),
                scheme,
                realizations: rs.len(),
                routed: k,
                mean_delay: mean(&|r| r.total_delay.unwrap_or_default()),
                mean_hops: mean(&|r| r.hop_count.unwrap_or_default() as f64),
            }
        })
        .collect()
}

/// Empirical CDF: distinct values ascending, `fractions[i] = P(X ≤ values[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    pub values: Vec<f64>,
    pub fractions: Vec<f64>,
}

impl CdfSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Step-function value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= x);
        if i == 0 {
            0.0
        } else {
            self.fractions[i - 1]
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.fractions.iter().copied())
    }
}

pub fn cdf(samples: &[f64]) -> Result<CdfSeries> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cdf of an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("cdf sample contains NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut series = CdfSeries { values: Vec::new(), fractions: Vec::new() };
    for (i, &x) in sorted.iter().enumerate() {
        if sorted.get(i + 1) != Some(&x) {
            series.values.push(x);
            series.fractions.push((i + 1) as f64 / n);
        }
    }
    Ok(series)
}

/// Cumulative degree distribution averaged over realizations:
/// `(k, mean fraction of nodes with out-degree < k)`.
pub fn mean_degree_distribution(cfg: &SyntheticConfig, realizations: u64) -> Result<Vec<(usize, f64)>> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("realizations must be >= 1".into()));
    }
    let per: Vec<Vec<(usize, f64)>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let sc = scenario::generate_realization(cfg, r)?;
            Ok(degree_distribution(&build_digraph(sc.nodes, &sc.params)?))
        })
        .collect::<Result<_>>()?;
    let kmax = per.iter().map(|d| d.len()).max().unwrap_or(0);
    Ok((0..kmax)
        .map(|k| {
            // past its own maximum every distribution has reached 1
            let sum: f64 = per.iter().map(|d| d.get(k).map_or(1.0, |p| p.1)).sum();
            (k, sum / per.len() as f64)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TravelOptions {
    /// Seconds between epochs.
    pub step: i64,
    /// Snapshot tolerance, seconds.
    pub tolerance: i64,
    pub aircraft: RadioProfile,
}

/// Routing outcome at one epoch of a tracked flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub timestamp: i64,
    /// Aircraft in the snapshot, tracked flight included.
    pub aircraft: usize,
    #[serde(rename = "total_delay_s")]
    pub total_delay: Option<f64>,
    pub hop_count: Option<usize>,
    pub route: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TravelReport {
    pub flight_id: String,
    pub epochs: Vec<EpochRecord>,
    /// Fraction of epochs with a route.
    pub connectivity: f64,
    /// Over routed epochs only; `None` if none routed.
    pub hops: Option<CdfSeries>,
    pub delay: Option<CdfSeries>,
    /// Epochs without a route, kept out of the CDFs.
    pub no_route: usize,
}

/// Routes `bs → flight_id` at every `step` across the flight's recorded
/// interval. Epochs where the flight has no sample within tolerance count
/// as unrouted.
pub fn travel_analysis(
    trajectories: &Trajectories,
    flight_id: &str,
    bs: &Node,
    satellites: &[Node],
    params: &LinkParams,
    opts: &TravelOptions,
) -> Result<TravelReport> {
    let track = trajectories.get(flight_id).ok_or_else(|| Error::UnknownFlight(flight_id.to_owned()))?;
    if opts.step <= 0 {
        return Err(Error::InvalidArgument(format!("travel step must be > 0, got {}", opts.step)));
    }
    let (Some(first), Some(last)) = (track.first(), track.last()) else {
        return Err(Error::UnknownFlight(flight_id.to_owned()));
    };
    let times: Vec<i64> = (first.timestamp..=last.timestamp).step_by(opts.step as usize).collect();

    let epochs = times
        .par_iter()
        .map(|&t| {
            let aircraft = scenario::snapshot(trajectories, t, opts.tolerance, &opts.aircraft)?;
            let mut rec = EpochRecord {
                timestamp: t,
                aircraft: aircraft.len(),
                total_delay: None,
                hop_count: None,
                route: None,
            };
            if !aircraft.iter().any(|n| n.id == flight_id) {
                return Ok(rec);
            }
            let mut nodes = Vec::with_capacity(aircraft.len() + 1 + satellites.len());
            nodes.push(bs.clone());
            nodes.extend(satellites.iter().cloned());
            nodes.extend(aircraft);
            let g = build_digraph(nodes, params)?;
            let (s, d) = (g.lookup(&bs.id)?, g.lookup(flight_id)?);
            if let Some(r) = routing::shortest_path(&g, s, d)? {
                rec.total_delay = Some(r.total_delay);
                rec.hop_count = Some(r.hop_count());
                rec.route = Some(r.hop_ids(&g));
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;

    let delays: Vec<f64> = epochs.iter().filter_map(|e| e.total_delay).collect();
    let hops: Vec<f64> = epochs.iter().filter_map(|e| e.hop_count.map(|h| h as f64)).collect();
    let routed = delays.len();
    Ok(TravelReport {
        flight_id: flight_id.to_owned(),
        connectivity: routed as f64 / epochs.len() as f64,
        no_route: epochs.len() - routed,
        hops: cdf(&hops).ok(),
        delay: cdf(&delays).ok(),
        epochs,
    })
}

fn create(path: &Path) -> Result<csv::Writer<std::io::BufWriter<std::fs::File>>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(std::io::BufWriter::new(file)))
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    let run = |w: &mut csv::Writer<_>| -> csv::Result<()> {
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    };
    run(&mut w).map_err(|e| Error::csv(path, e))
}

/// Writes `sweep.csv`-style output; header [`SWEEP_CSV_HEADER`].
pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    write_rows(path, &SWEEP_CSV_HEADER, records)
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    rdr.deserialize().collect::<csv::Result<_>>().map_err(|e| Error::csv(path, e))
}

/// Header `value,cumulative_fraction`.
pub fn write_cdf_csv(series: &CdfSeries, path: &Path) -> Result<()> {
    write_rows(path, &["value", "cumulative_fraction"], series.points())
}

/// One point of a cumulative degree distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeRow {
    /// Relay count (synthetic) or aircraft in the snapshot (flight data).
    pub n_intermediate: usize,
    pub degree: usize,
    /// Fraction of nodes with out-degree below `degree`.
    pub fraction_below: f64,
}

impl DegreeRow {
    pub fn from_distribution(n_intermediate: usize, distribution: &[(usize, f64)]) -> Vec<DegreeRow> {
        distribution
            .iter()
            .map(|&(degree, fraction_below)| DegreeRow { n_intermediate, degree, fraction_below })
            .collect()
    }
}

/// Header `n_intermediate,degree,fraction_below`.
pub fn write_degree_csv(rows: &[DegreeRow], path: &Path) -> Result<()> {
    write_rows(path, &["n_intermediate", "degree", "fraction_below"], rows)
}

/// Header `timestamp,aircraft,total_delay_s,hop_count,route`.
pub fn write_epochs_csv(epochs: &[EpochRecord], path: &Path) -> Result<()> {
    write_rows(path, &["timestamp", "aircraft", "total_delay_s", "hop_count", "route"], epochs)
}
