//! Mapping-time measurements over synthetic schemas.
//!
//! Only the call to [`map_rdbs_to_mtheory`] is timed; generation happens
//! before the clock starts. Timed runs are always sequential.

use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::statistics::Statistics;
use thiserror::Error;

use crate::config::MappingConfig;
use crate::mapper::map_rdbs_to_mtheory;
use crate::schema::RelationalDatabaseSchema;
use crate::synth::{generate_schema, SchemaSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    /// Relation counts for the first sweep.
    pub relation_counts: Vec<usize>,
    /// Non-key attributes per relation during the relation sweep.
    pub attributes_per_relation: usize,
    /// Non-key attributes per relation for the second sweep.
    pub attribute_counts: Vec<usize>,
    /// Relation count held fixed during the attribute sweep.
    pub fixed_relations: usize,
    pub key_width: usize,
    pub entity_fraction: f64,
    pub repetitions: usize,
    pub seed: u64,
    /// Generate schemas on several threads. Timing stays sequential.
    pub parallel: bool,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            relation_counts: (1..=10).map(|i| i * 50).collect(),
            attributes_per_relation: 10,
            attribute_counts: std::iter::once(10).chain((1..=10).map(|i| i * 50)).collect(),
            fixed_relations: 100,
            key_width: 2,
            entity_fraction: 0.5,
            repetitions: 20,
            seed: 0,
            parallel: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("invalid bench spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Relations,
    Attributes,
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sweep::Relations => "relations",
            Sweep::Attributes => "attributes",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPoint {
    pub sweep: Sweep,
    pub relations: usize,
    pub attributes_per_relation: usize,
    /// Mean over all repetitions of the total attribute count.
    pub total_attributes: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub points: Vec<BenchPoint>,
    /// Pearson correlation of mean time against relation count.
    pub relation_correlation: Option<f64>,
    /// Pearson correlation of mean time against attributes per relation.
    pub attribute_correlation: Option<f64>,
}

/// Pearson's r, or `None` with fewer than two points or no variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (sx, sy) = (xs.std_dev(), ys.std_dev());
    if !(sx > 0.0 && sy > 0.0) {
        return None;
    }
    Some(xs.covariance(ys) / (sx * sy))
}

impl BenchSpec {
    fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::InvalidSpec(m.to_string()));
        if self.repetitions == 0 {
            return bad("repetitions must be positive");
        }
        if self.key_width == 0 {
            return bad("key width must be positive");
        }
        if !(0.0..=1.0).contains(&self.entity_fraction) {
            return bad("entity fraction must lie in [0, 1]");
        }
        if self.relation_counts.is_empty() && self.attribute_counts.is_empty() {
            return bad("nothing to measure");
        }
        if self.relation_counts.contains(&0) || self.fixed_relations == 0 {
            return bad("relation counts must be positive");
        }
        Ok(())
    }

    fn schema_spec(&self, relations: usize, attributes: usize) -> SchemaSpec {
        SchemaSpec {
            relations,
            entity_fraction: self.entity_fraction,
            key_width: (self.key_width, self.key_width),
            attributes: (attributes, attributes),
            reference_probability: 0.1,
            domain_probability: 0.3,
            shared_attribute_names: false,
        }
    }
}

fn point_seed(seed: u64, sweep: Sweep, index: usize, rep: usize) -> u64 {
    let tag = match sweep {
        Sweep::Relations => 0u64,
        Sweep::Attributes => 1,
    };
    seed ^ (tag << 62) ^ ((index as u64) << 32) ^ rep as u64
}

fn schemas(spec: &BenchSpec, s: &SchemaSpec, sweep: Sweep, index: usize) -> Vec<RelationalDatabaseSchema> {
    let make = |rep: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(point_seed(spec.seed, sweep, index, rep));
        generate_schema(s, &mut rng, "Bench")
    };
    if !spec.parallel {
        return (0..spec.repetitions).map(make).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..spec.repetitions).map(|rep| scope.spawn(move || make(rep))).collect();
        handles.into_iter().map(|h| h.join().expect("generator thread")).collect()
    })
}

fn time_mapping(schema: &RelationalDatabaseSchema, config: &MappingConfig) -> Duration {
    let start = Instant::now();
    let theory = map_rdbs_to_mtheory(schema, config).expect("generated schemas map");
    let elapsed = start.elapsed();
    drop(std::hint::black_box(theory));
    elapsed
}

pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport, BenchError> {
    spec.validate()?;
    let config = MappingConfig::default();
    let runs = spec
        .relation_counts
        .iter()
        .map(|&n| (Sweep::Relations, n, spec.attributes_per_relation))
        .chain(
            spec.attribute_counts
                .iter()
                .map(|&a| (Sweep::Attributes, spec.fixed_relations, a)),
        );
    let mut points = Vec::new();
    let mut warmed = false;
    for (index, (sweep, relations, attributes)) in runs.enumerate() {
        let batch = schemas(spec, &spec.schema_spec(relations, attributes), sweep, index);
        if !warmed {
            time_mapping(&batch[0], &config);
            warmed = true;
        }
        let times: Vec<f64> = batch.iter().map(|s| time_mapping(s, &config).as_secs_f64()).collect();
        let total: usize = batch
            .iter()
            .map(|s| s.relations().iter().map(|r| r.attributes.len()).sum::<usize>())
            .sum();
        points.push(BenchPoint {
            sweep,
            relations,
            attributes_per_relation: attributes,
            total_attributes: total as f64 / batch.len() as f64,
            mean_seconds: times.iter().sum::<f64>() / times.len() as f64,
        });
    }
    let correlation = |sweep: Sweep, x: fn(&BenchPoint) -> f64| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|p| p.sweep == sweep)
            .map(|p| (x(p), p.mean_seconds))
            .unzip();
        pearson(&xs, &ys)
    };
    let relation_correlation = correlation(Sweep::Relations, |p| p.relations as f64);
    let attribute_correlation = correlation(Sweep::Attributes, |p| p.attributes_per_relation as f64);
    Ok(BenchReport {
        points,
        relation_correlation,
        attribute_correlation,
    })
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.points {
            writeln!(
                f,
                "point sweep={} relations={} attributes_per_relation={} total_attributes={:.1} mean_seconds={:.9}",
                p.sweep, p.relations, p.attributes_per_relation, p.total_attributes, p.mean_seconds
            )?;
        }
        for (sweep, r) in [
            (Sweep::Relations, self.relation_correlation),
            (Sweep::Attributes, self.attribute_correlation),
        ] {
            match r {
                Some(r) => writeln!(f, "correlation sweep={sweep} value={r:.4}")?,
                None => writeln!(f, "correlation sweep={sweep} value=undefined")?,
            }
        }
        Ok(())
    }
}
