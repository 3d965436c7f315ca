use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::preorder::Preorder;
use super::StatsError;
use crate::topology::TopologyMetrics;

/// Graph properties topologies can be ranked by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    /// Arc density; equivalent to the number of links at fixed size.
    Density,
    AvgShortestPath,
    Diameter,
    AvgDegree,
    MaxDegree,
    Clustering,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::Density,
        Feature::AvgShortestPath,
        Feature::Diameter,
        Feature::AvgDegree,
        Feature::MaxDegree,
        Feature::Clustering,
    ];

    pub fn value(self, m: &TopologyMetrics) -> f64 {
        match self {
            Feature::Density => m.density(),
            Feature::AvgShortestPath => m.avg_shortest_path,
            Feature::Diameter => m.diameter as f64,
            Feature::AvgDegree => m.avg_degree,
            Feature::MaxDegree => m.max_degree as f64,
            Feature::Clustering => m.clustering_coefficient,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feature::Density => "density",
            Feature::AvgShortestPath => "avg_shortest_path",
            Feature::Diameter => "diameter",
            Feature::AvgDegree => "avg_degree",
            Feature::MaxDegree => "max_degree",
            Feature::Clustering => "clustering",
        })
    }
}

impl FromStr for Feature {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "density" | "edges" | "edge_count" => Feature::Density,
            "avg_shortest_path" | "avg_path" => Feature::AvgShortestPath,
            "diameter" => Feature::Diameter,
            "avg_degree" => Feature::AvgDegree,
            "max_degree" => Feature::MaxDegree,
            "clustering" | "clustering_coefficient" => Feature::Clustering,
            _ => return Err(StatsError::UnknownFeature(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Smaller values rank higher.
    Ascending,
    /// Larger values rank higher.
    Descending,
}

impl FromStr for Direction {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "asc" | "ascending" => Ok(Direction::Ascending),
            "desc" | "descending" => Ok(Direction::Descending),
            _ => Err(StatsError::Malformed(format!("unknown direction '{s}'"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Ascending => "ascending",
            Direction::Descending => "descending",
        })
    }
}

/// Weak order of labelled topologies by one metric; equal values tie.
pub fn feature_preorder(metrics: &[(String, TopologyMetrics)], feature: Feature, direction: Direction) -> Preorder {
    let values: Vec<f64> = metrics.iter().map(|(_, m)| feature.value(m)).collect();
    let mut p = Preorder::new(metrics.iter().map(|(l, _)| l.clone()).collect());
    for i in 0..values.len() {
        for j in 0..values.len() {
            let ahead = match direction {
                Direction::Ascending => values[i] < values[j],
                Direction::Descending => values[i] > values[j],
            };
            if ahead {
                p.set_better(i, j);
            }
        }
    }
    p
}
