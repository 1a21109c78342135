//! RFC-4180 CSV sinks for one run.
//!
//! Every row starts with `case,peak_mbps,seed,episode` so files can be
//! concatenated and re-aggregated independently. Both files are flushed
//! after each episode, so an abort loses at most the episode in flight.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use risnet_core::cohdrl::EpisodeMetrics;

use crate::LabError;

type Sink = csv::Writer<BufWriter<File>>;

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Per-window and per-episode writers of a single (case, peak, seed) run.
pub struct RunWriter {
    prefix: [String; 3],
    windows: Sink,
    episodes: Sink,
    header_done: bool,
    pub windows_path: PathBuf,
    pub episodes_path: PathBuf,
}

impl RunWriter {
    /// Files `<stem>_windows.csv` and `<stem>_episodes.csv` under `dir`.
    pub fn create(dir: &Path, stem: &str, case: &str, peak_mbps: f64, seed: u64) -> Result<Self, LabError> {
        let windows_path = dir.join(format!("{stem}_windows.csv"));
        let episodes_path = dir.join(format!("{stem}_episodes.csv"));
        let open = |p: &Path| -> Result<Sink, LabError> { Ok(csv::Writer::from_writer(BufWriter::new(File::create(p)?))) };
        Ok(Self {
            prefix: [case.to_string(), num(peak_mbps), seed.to_string()],
            windows: open(&windows_path)?,
            episodes: open(&episodes_path)?,
            header_done: false,
            windows_path,
            episodes_path,
        })
    }

    fn write_headers(&mut self, m: &EpisodeMetrics) -> Result<(), LabError> {
        let n_bs = m.windows.first().map_or(0, |w| w.bs_power.len());
        let n_sub = m.windows.first().map_or(0, |w| w.sub_reward.len());
        let mut h: Vec<String> = ["case", "peak_mbps", "seed", "episode", "window", "slot", "goal"].map(String::from).to_vec();
        h.extend((0..n_bs).map(|b| format!("bs_power_{b}")));
        h.extend((0..n_bs).map(|b| format!("bs_energy_{b}")));
        h.extend(["capacity", "served", "demand", "ee", "overload_fraction", "meta_reward"].map(String::from));
        h.extend((0..n_sub).map(|j| format!("sub_reward_{j}")));
        h.push("ce_fallbacks".into());
        self.windows.write_record(&h)?;

        let mut h: Vec<String> = [
            "case",
            "peak_mbps",
            "seed",
            "episode",
            "mean_ee",
            "total_energy_j",
            "total_served_bits",
            "stationarity",
            "lp_solves",
            "lp_fallbacks",
            "lp_max_violation",
            "meta_loss",
            "mean_fp_iterations",
        ]
        .map(String::from)
        .to_vec();
        h.extend((0..24).map(|hour| format!("on_h{hour:02}")));
        self.episodes.write_record(&h)?;
        self.header_done = true;
        Ok(())
    }

    /// Append one episode and flush both files.
    pub fn write_episode(&mut self, m: &EpisodeMetrics) -> Result<(), LabError> {
        if !self.header_done {
            self.write_headers(m)?;
        }
        for w in &m.windows {
            let mut r: Vec<String> = self.prefix.to_vec();
            r.extend([w.episode.to_string(), w.window.to_string(), w.slot.to_string(), w.goal.to_string()]);
            r.extend(w.bs_power.iter().copied().map(num));
            r.extend(w.bs_energy.iter().copied().map(num));
            r.extend([w.capacity, w.served, w.demand, w.ee, w.overload_fraction, w.meta_reward].map(num));
            r.extend(w.sub_reward.iter().copied().map(num));
            r.push(w.ce_fallbacks.to_string());
            self.windows.write_record(&r)?;
        }
        let mut r: Vec<String> = self.prefix.to_vec();
        r.extend([
            m.episode.to_string(),
            num(m.mean_ee),
            num(m.total_energy_j),
            num(m.total_served_bits),
            opt(m.stationarity),
            m.lp_solves.to_string(),
            m.lp_fallbacks.to_string(),
            num(m.lp_max_violation),
            opt(m.meta_loss),
            num(m.mean_fp_iterations),
        ]);
        r.extend(m.hourly_on.iter().copied().map(num));
        self.episodes.write_record(&r)?;
        self.windows.flush()?;
        self.episodes.flush()?;
        Ok(())
    }
}
