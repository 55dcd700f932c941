//! Synthetic connection records in KDD Cup 99 file format.
//!
//! Each label has a hand-written traffic profile loosely modelled on the
//! published feature statistics of the 10% file (e.g. smurf is ICMP echo
//! replies with 520/1032-byte payloads and saturated counts, neptune is SYN
//! floods with `S0` flags and serror rates near 1). The noise terms make
//! neighbouring profiles overlap, so the classes are learnable but not
//! trivially separable. The generator stands in for the real file when it
//! is not at hand.

use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// Label counts of `kddcup.data_10_percent` (494 021 records).
pub const TEN_PERCENT_LABEL_COUNTS: [(&str, usize); 23] = [
    ("normal", 97278),
    ("smurf", 280790),
    ("neptune", 107201),
    ("back", 2203),
    ("teardrop", 979),
    ("pod", 264),
    ("land", 21),
    ("satan", 1589),
    ("ipsweep", 1247),
    ("portsweep", 1040),
    ("nmap", 231),
    ("warezclient", 1020),
    ("guess_passwd", 53),
    ("warezmaster", 20),
    ("imap", 12),
    ("ftp_write", 8),
    ("multihop", 7),
    ("phf", 4),
    ("spy", 2),
    ("buffer_overflow", 30),
    ("rootkit", 10),
    ("loadmodule", 9),
    ("perl", 3),
];

/// Label counts of the 10% file scaled by `scale`, rounded, at least one each.
pub fn ten_percent_profile(scale: f64) -> Vec<(&'static str, usize)> {
    TEN_PERCENT_LABEL_COUNTS
        .iter()
        .map(|&(l, n)| (l, ((n as f64 * scale).round() as usize).max(1)))
        .collect()
}

/// Generates `count` records per label, shuffled, one line each
/// (trailing period on the label, LF line ends).
pub fn generate(label_counts: &[(&str, usize)], seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<&str> = label_counts
        .iter()
        .flat_map(|&(l, n)| std::iter::repeat_n(l, n))
        .collect();
    order.shuffle(&mut rng);
    let mut out = String::with_capacity(order.len() * 110);
    for label in order {
        synth_record(label, &mut rng).write_line(label, &mut out);
    }
    out
}

mod col {
    pub const DURATION: usize = 0;
    pub const SRC_BYTES: usize = 4;
    pub const DST_BYTES: usize = 5;
    pub const LAND: usize = 6;
    pub const WRONG_FRAGMENT: usize = 7;
    pub const HOT: usize = 9;
    pub const NUM_FAILED_LOGINS: usize = 10;
    pub const LOGGED_IN: usize = 11;
    pub const NUM_COMPROMISED: usize = 12;
    pub const ROOT_SHELL: usize = 13;
    pub const NUM_ROOT: usize = 15;
    pub const NUM_FILE_CREATIONS: usize = 16;
    pub const NUM_SHELLS: usize = 17;
    pub const NUM_ACCESS_FILES: usize = 18;
    pub const IS_GUEST_LOGIN: usize = 21;
    pub const COUNT: usize = 22;
    pub const SRV_COUNT: usize = 23;
    pub const SERROR_RATE: usize = 24;
    pub const SRV_SERROR_RATE: usize = 25;
    pub const RERROR_RATE: usize = 26;
    pub const SRV_RERROR_RATE: usize = 27;
    pub const SAME_SRV_RATE: usize = 28;
    pub const DIFF_SRV_RATE: usize = 29;
    pub const SRV_DIFF_HOST_RATE: usize = 30;
    pub const DST_HOST_COUNT: usize = 31;
    pub const DST_HOST_SRV_COUNT: usize = 32;
    pub const DST_HOST_SAME_SRV_RATE: usize = 33;
    pub const DST_HOST_DIFF_SRV_RATE: usize = 34;
    pub const DST_HOST_SAME_SRC_PORT_RATE: usize = 35;
    pub const DST_HOST_SRV_DIFF_HOST_RATE: usize = 36;
    pub const DST_HOST_SERROR_RATE: usize = 37;
    pub const DST_HOST_SRV_SERROR_RATE: usize = 38;
    pub const DST_HOST_RERROR_RATE: usize = 39;
    pub const DST_HOST_SRV_RERROR_RATE: usize = 40;
}

const RATE_COLUMNS: std::ops::RangeInclusive<usize> = col::SERROR_RATE..=col::SRV_DIFF_HOST_RATE;
const HOST_RATE_COLUMNS: std::ops::RangeInclusive<usize> =
    col::DST_HOST_SAME_SRV_RATE..=col::DST_HOST_SRV_RERROR_RATE;

const NORMAL_SERVICES: [&str; 10] = [
    "http", "http", "http", "http", "smtp", "smtp", "ftp_data", "domain_u", "private", "ftp",
];
const SCANNED_SERVICES: [&str; 12] = [
    "private", "private", "private", "other", "telnet", "ftp", "finger", "http", "smtp", "domain",
    "sunrpc", "uucp",
];

struct Synth {
    protocol: &'static str,
    service: &'static str,
    flag: &'static str,
    values: [f64; 41],
}

impl Synth {
    fn new(protocol: &'static str, service: &'static str, flag: &'static str) -> Self {
        Self {
            protocol,
            service,
            flag,
            values: [0.0; 41],
        }
    }

    fn set(&mut self, column: usize, v: f64) -> &mut Self {
        self.values[column] = v;
        self
    }

    fn write_line(&self, label: &str, out: &mut String) {
        use std::fmt::Write;
        for (i, v) in self.values.iter().enumerate() {
            match i {
                1 => out.push_str(self.protocol),
                2 => out.push_str(self.service),
                3 => out.push_str(self.flag),
                _ if RATE_COLUMNS.contains(&i) || HOST_RATE_COLUMNS.contains(&i) => {
                    let _ = write!(out, "{:.2}", v.clamp(0.0, 1.0));
                }
                _ => {
                    let _ = write!(out, "{}", v.max(0.0).round() as u64);
                }
            }
            out.push(',');
        }
        out.push_str(label);
        out.push_str(".\n");
    }
}

fn jitter(rng: &mut ChaCha8Rng, center: f64, spread: f64) -> f64 {
    (center + rng.random_range(-spread..=spread)).clamp(0.0, 1.0)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

fn synth_record(label: &str, rng: &mut ChaCha8Rng) -> Synth {
    match label {
        "normal" => normal(rng),
        "smurf" | "pod" => {
            let mut s = Synth::new("icmp", "ecr_i", "SF");
            let bytes = if label == "pod" { 1480.0 } else { pick(rng, &[520.0, 1032.0]) };
            let count = rng.random_range(480.0..511.0);
            s.set(col::SRC_BYTES, bytes)
                .set(col::WRONG_FRAGMENT, if label == "pod" { 1.0 } else { 0.0 })
                .set(col::COUNT, count)
                .set(col::SRV_COUNT, count)
                .set(col::SAME_SRV_RATE, 1.0)
                .set(col::DST_HOST_COUNT, 255.0)
                .set(col::DST_HOST_SRV_COUNT, 255.0)
                .set(col::DST_HOST_SAME_SRV_RATE, 1.0)
                .set(col::DST_HOST_SAME_SRC_PORT_RATE, jitter(rng, 0.95, 0.05));
            if label == "pod" {
                s.set(col::COUNT, rng.random_range(1.0..5.0))
                    .set(col::SRV_COUNT, rng.random_range(1.0..5.0))
                    .set(col::DST_HOST_COUNT, rng.random_range(1.0..150.0));
            }
            s
        }
        "neptune" | "land" => {
            let service = pick(rng, &SCANNED_SERVICES);
            let flag = if rng.random_bool(0.85) { "S0" } else { "REJ" };
            let mut s = Synth::new("tcp", service, flag);
            let serror = if flag == "S0" { 1.0 } else { 0.0 };
            s.set(col::COUNT, rng.random_range(100.0..300.0))
                .set(col::SRV_COUNT, rng.random_range(1.0..25.0))
                .set(col::SERROR_RATE, serror)
                .set(col::SRV_SERROR_RATE, serror)
                .set(col::RERROR_RATE, 1.0 - serror)
                .set(col::SRV_RERROR_RATE, 1.0 - serror)
                .set(col::SAME_SRV_RATE, jitter(rng, 0.05, 0.04))
                .set(col::DIFF_SRV_RATE, jitter(rng, 0.07, 0.03))
                .set(col::DST_HOST_COUNT, 255.0)
                .set(col::DST_HOST_SRV_COUNT, rng.random_range(1.0..25.0))
                .set(col::DST_HOST_SAME_SRV_RATE, jitter(rng, 0.05, 0.04))
                .set(col::DST_HOST_DIFF_SRV_RATE, jitter(rng, 0.07, 0.03))
                .set(col::DST_HOST_SERROR_RATE, serror)
                .set(col::DST_HOST_SRV_SERROR_RATE, serror)
                .set(col::DST_HOST_RERROR_RATE, 1.0 - serror)
                .set(col::DST_HOST_SRV_RERROR_RATE, 1.0 - serror);
            if label == "land" {
                s.set(col::LAND, 1.0)
                    .set(col::COUNT, rng.random_range(1.0..3.0))
                    .set(col::DST_HOST_COUNT, rng.random_range(1.0..20.0));
            }
            s
        }
        "back" => {
            let mut s = Synth::new("tcp", "http", "SF");
            s.set(col::SRC_BYTES, 54540.0)
                .set(col::DST_BYTES, rng.random_range(7300.0..8320.0))
                .set(col::HOT, 2.0)
                .set(col::LOGGED_IN, 1.0)
                .set(col::NUM_COMPROMISED, 1.0)
                .set(col::COUNT, rng.random_range(1.0..10.0))
                .set(col::SRV_COUNT, rng.random_range(1.0..10.0))
                .set(col::SAME_SRV_RATE, 1.0)
                .set(col::DST_HOST_COUNT, rng.random_range(50.0..255.0))
                .set(col::DST_HOST_SRV_COUNT, rng.random_range(50.0..255.0))
                .set(col::DST_HOST_SAME_SRV_RATE, 1.0);
            s
        }
        "teardrop" => {
            let mut s = Synth::new("udp", "private", "SF");
            s.set(col::SRC_BYTES, 28.0)
                .set(col::WRONG_FRAGMENT, 3.0)
                .set(col::COUNT, rng.random_range(1.0..80.0))
                .set(col::SRV_COUNT, rng.random_range(1.0..80.0))
                .set(col::SAME_SRV_RATE, 1.0)
                .set(col::DST_HOST_COUNT, rng.random_range(50.0..255.0))
                .set(col::DST_HOST_SRV_COUNT, rng.random_range(1.0..100.0))
                .set(col::DST_HOST_SAME_SRC_PORT_RATE, jitter(rng, 0.2, 0.2));
            s
        }
        "satan" | "portsweep" | "nmap" | "ipsweep" => probe(label, rng),
        "buffer_overflow" | "loadmodule" | "perl" | "rootkit" => root_attack(label, rng),
        "guess_passwd" | "ftp_write" | "imap" | "phf" | "multihop" | "warezmaster" | "warezclient"
        | "spy" => remote_attack(label, rng),
        // Unknown labels still produce a well-formed line.
        _ => normal(rng),
    }
}

fn normal(rng: &mut ChaCha8Rng) -> Synth {
    let service = pick(rng, &NORMAL_SERVICES);
    let protocol = match service {
        "domain_u" => "udp",
        "private" if rng.random_bool(0.5) => "udp",
        _ => "tcp",
    };
    let flag = match rng.random_range(0..100) {
        0..=1 => "REJ",
        2 => "S0",
        3 => "RSTO",
        _ => "SF",
    };
    let mut s = Synth::new(protocol, service, flag);
    let count = log_uniform(rng, 1.0, 60.0);
    let busy_host = rng.random_bool(0.3);
    s.set(col::DURATION, if rng.random_bool(0.9) { 0.0 } else { log_uniform(rng, 1.0, 5000.0) })
        .set(col::SRC_BYTES, log_uniform(rng, 40.0, 3000.0))
        .set(col::DST_BYTES, if protocol == "udp" { log_uniform(rng, 40.0, 300.0) } else { log_uniform(rng, 100.0, 40000.0) })
        .set(col::LOGGED_IN, if protocol == "tcp" && flag == "SF" { 1.0 } else { 0.0 })
        .set(col::HOT, if rng.random_bool(0.05) { rng.random_range(1.0..4.0) } else { 0.0 })
        .set(col::COUNT, count)
        .set(col::SRV_COUNT, count * rng.random_range(0.8..1.5))
        .set(col::SAME_SRV_RATE, jitter(rng, 0.95, 0.08))
        .set(col::DIFF_SRV_RATE, jitter(rng, 0.02, 0.03))
        .set(col::SRV_DIFF_HOST_RATE, jitter(rng, 0.1, 0.12))
        .set(col::DST_HOST_COUNT, if busy_host { 255.0 } else { rng.random_range(1.0..255.0) })
        .set(col::DST_HOST_SRV_COUNT, rng.random_range(1.0..255.0))
        .set(col::DST_HOST_SAME_SRV_RATE, jitter(rng, 0.8, 0.25))
        .set(col::DST_HOST_DIFF_SRV_RATE, jitter(rng, 0.03, 0.05))
        .set(col::DST_HOST_SAME_SRC_PORT_RATE, jitter(rng, 0.1, 0.12))
        .set(col::DST_HOST_SRV_DIFF_HOST_RATE, jitter(rng, 0.03, 0.04));
    match flag {
        "REJ" | "RSTO" => {
            s.set(col::RERROR_RATE, jitter(rng, 0.5, 0.5))
                .set(col::DST_HOST_RERROR_RATE, jitter(rng, 0.2, 0.2));
        }
        "S0" => {
            s.set(col::SERROR_RATE, jitter(rng, 0.5, 0.5))
                .set(col::DST_HOST_SERROR_RATE, jitter(rng, 0.2, 0.2));
        }
        _ => {}
    }
    s
}

fn probe(label: &str, rng: &mut ChaCha8Rng) -> Synth {
    let mut s = match label {
        "ipsweep" => Synth::new("icmp", "eco_i", "SF"),
        "nmap" => match rng.random_range(0..3) {
            0 => Synth::new("icmp", "eco_i", "SF"),
            1 => Synth::new("udp", "private", "SF"),
            _ => Synth::new("tcp", "private", pick(rng, &["SH", "S0", "REJ"])),
        },
        "portsweep" => Synth::new("tcp", pick(rng, &SCANNED_SERVICES), pick(rng, &["REJ", "RSTR", "RSTR", "S0"])),
        _ => Synth::new(
            pick(rng, &["tcp", "tcp", "tcp", "udp"]),
            pick(rng, &SCANNED_SERVICES),
            pick(rng, &["REJ", "REJ", "S0", "RSTO", "SF"]),
        ),
    };
    let refused = matches!(s.flag, "REJ" | "RSTR" | "RSTO");
    s.set(col::SRC_BYTES, if s.protocol == "icmp" { pick(rng, &[8.0, 18.0, 20.0]) } else { rng.random_range(0.0..10.0) })
        .set(col::COUNT, rng.random_range(1.0..12.0))
        .set(col::SRV_COUNT, rng.random_range(1.0..6.0))
        .set(col::SAME_SRV_RATE, jitter(rng, 0.3, 0.3))
        .set(col::DIFF_SRV_RATE, jitter(rng, 0.6, 0.4))
        .set(col::RERROR_RATE, if refused { jitter(rng, 0.9, 0.1) } else { 0.0 })
        .set(col::SRV_RERROR_RATE, if refused { jitter(rng, 0.9, 0.1) } else { 0.0 })
        .set(col::DST_HOST_COUNT, rng.random_range(1.0..255.0))
        .set(col::DST_HOST_SRV_COUNT, rng.random_range(1.0..40.0))
        .set(col::DST_HOST_SAME_SRV_RATE, jitter(rng, 0.2, 0.2))
        .set(col::DST_HOST_DIFF_SRV_RATE, jitter(rng, 0.5, 0.4))
        .set(col::DST_HOST_SAME_SRC_PORT_RATE, jitter(rng, 0.7, 0.3))
        .set(col::DST_HOST_SRV_DIFF_HOST_RATE, jitter(rng, 0.3, 0.3))
        .set(col::DST_HOST_RERROR_RATE, if refused { jitter(rng, 0.7, 0.3) } else { 0.0 })
        .set(col::DST_HOST_SRV_RERROR_RATE, if refused { jitter(rng, 0.8, 0.2) } else { 0.0 });
    if label == "ipsweep" {
        s.set(col::DST_HOST_COUNT, rng.random_range(1.0..40.0))
            .set(col::DST_HOST_SRV_COUNT, rng.random_range(20.0..255.0))
            .set(col::DST_HOST_SRV_DIFF_HOST_RATE, jitter(rng, 0.6, 0.4));
    }
    if s.flag == "S0" {
        s.set(col::SERROR_RATE, jitter(rng, 0.8, 0.2))
            .set(col::DST_HOST_SERROR_RATE, jitter(rng, 0.5, 0.5));
    }
    s
}

fn root_attack(label: &str, rng: &mut ChaCha8Rng) -> Synth {
    let service = if label == "rootkit" { pick(rng, &["telnet", "ftp_data", "private"]) } else { pick(rng, &["telnet", "telnet", "ftp_data"]) };
    let protocol = if service == "private" { "udp" } else { "tcp" };
    let mut s = Synth::new(protocol, service, "SF");
    s.set(col::DURATION, log_uniform(rng, 1.0, 300.0))
        .set(col::SRC_BYTES, log_uniform(rng, 100.0, 5000.0))
        .set(col::DST_BYTES, log_uniform(rng, 300.0, 20000.0))
        .set(col::HOT, rng.random_range(0.0..4.0))
        .set(col::LOGGED_IN, if protocol == "tcp" { 1.0 } else { 0.0 })
        .set(col::NUM_COMPROMISED, rng.random_range(0.0..3.0))
        .set(col::ROOT_SHELL, if label == "rootkit" && rng.random_bool(0.5) { 0.0 } else { 1.0 })
        .set(col::NUM_ROOT, rng.random_range(0.0..3.0))
        .set(col::NUM_FILE_CREATIONS, rng.random_range(0.0..3.0))
        .set(col::NUM_SHELLS, rng.random_range(0.0..2.0))
        .set(col::COUNT, rng.random_range(1.0..3.0))
        .set(col::SRV_COUNT, rng.random_range(1.0..3.0))
        .set(col::SAME_SRV_RATE, 1.0)
        .set(col::DST_HOST_COUNT, rng.random_range(1.0..60.0))
        .set(col::DST_HOST_SRV_COUNT, rng.random_range(1.0..30.0))
        .set(col::DST_HOST_SAME_SRV_RATE, jitter(rng, 0.4, 0.4))
        .set(col::DST_HOST_SAME_SRC_PORT_RATE, jitter(rng, 0.2, 0.2));
    s
}

fn remote_attack(label: &str, rng: &mut ChaCha8Rng) -> Synth {
    let (service, flag) = match label {
        "guess_passwd" => ("telnet", pick(rng, &["RSTO", "SF"])),
        "imap" => ("imap4", pick(rng, &["SH", "S3", "SF"])),
        "phf" => ("http", "SF"),
        "warezclient" => (pick(rng, &["ftp_data", "ftp"]), "SF"),
        "warezmaster" => ("ftp", "SF"),
        "ftp_write" => (pick(rng, &["ftp", "ftp_data"]), "SF"),
        _ => (pick(rng, &["telnet", "ftp_data"]), "SF"),
    };
    let mut s = Synth::new("tcp", service, flag);
    s.set(col::DURATION, log_uniform(rng, 1.0, 2000.0))
        .set(col::SRC_BYTES, log_uniform(rng, 50.0, 20000.0))
        .set(col::DST_BYTES, log_uniform(rng, 50.0, 5000.0))
        .set(col::LOGGED_IN, if flag == "SF" { 1.0 } else { 0.0 })
        .set(col::COUNT, rng.random_range(1.0..4.0))
        .set(col::SRV_COUNT, rng.random_range(1.0..4.0))
        .set(col::SAME_SRV_RATE, 1.0)
        .set(col::DST_HOST_COUNT, rng.random_range(1.0..100.0))
        .set(col::DST_HOST_SRV_COUNT, rng.random_range(1.0..40.0))
        .set(col::DST_HOST_SAME_SRV_RATE, jitter(rng, 0.6, 0.4))
        .set(col::DST_HOST_SAME_SRC_PORT_RATE, jitter(rng, 0.5, 0.5));
    match label {
        "guess_passwd" => {
            s.set(col::NUM_FAILED_LOGINS, 1.0).set(col::SRC_BYTES, rng.random_range(100.0..140.0));
        }
        "warezclient" | "warezmaster" => {
            s.set(col::IS_GUEST_LOGIN, 1.0)
                .set(col::HOT, rng.random_range(2.0..30.0))
                .set(col::SRC_BYTES, log_uniform(rng, 300.0, 600000.0));
        }
        "phf" => {
            s.set(col::HOT, 1.0).set(col::NUM_ACCESS_FILES, 1.0).set(col::SRC_BYTES, 51.0);
        }
        "imap" => {
            s.set(col::SRC_BYTES, rng.random_range(0.0..20.0)).set(col::DURATION, 0.0);
        }
        _ => {
            s.set(col::NUM_FILE_CREATIONS, rng.random_range(0.0..3.0))
                .set(col::HOT, rng.random_range(0.0..3.0))
                .set(col::NUM_ACCESS_FILES, rng.random_range(0.0..2.0));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{map_label, parse_str, ClassLabel};

    #[test]
    fn ten_percent_profile_totals() {
        let total: usize = TEN_PERCENT_LABEL_COUNTS.iter().map(|&(_, n)| n).sum();
        assert_eq!(total, 494021);
        let tiny = ten_percent_profile(0.0);
        assert!(tiny.iter().all(|&(_, n)| n == 1));
    }

    #[test]
    fn generated_lines_parse_and_map() {
        let profile: Vec<(&str, usize)> = TEN_PERCENT_LABEL_COUNTS.iter().map(|&(l, _)| (l, 3)).collect();
        let text = generate(&profile, 11);
        let recs = parse_str(&text).unwrap();
        assert_eq!(recs.len(), 23 * 3);
        let mut counts = [0; 5];
        for r in &recs {
            counts[map_label(r.label()).unwrap().index()] += 1;
        }
        assert_eq!(counts[ClassLabel::Normal.index()], 3);
        assert_eq!(counts[ClassLabel::U2Su.index()], 12);
    }

    #[test]
    fn deterministic_given_seed() {
        let profile = ten_percent_profile(0.001);
        assert_eq!(generate(&profile, 5), generate(&profile, 5));
        assert_ne!(generate(&profile, 5), generate(&profile, 6));
    }
}
