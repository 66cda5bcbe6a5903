//! Turning generator flags into panels.

use std::fs::File;
use std::path::Path;

use graphwave::demo::{interval_wave_demo_panel, path_wave_panel, three_tone_panel, travelling_cosine_panel};
use graphwave::graph::{make_path_graph, GraphJson, WeightedGraph};
use graphwave::panel::SignalPanel;
use graphwave::wave::{demo_initial_condition, simulate_graph_wave, uniform_grid, WaveInitialCondition};
use graphwave::{Error, Result};

use super::{Demo, GeneratorArgs, Grid, SourceArgs};

const DEFAULT_SQRT_C: f64 = 1.5;
const DEMO_PATH_NODES: usize = 21;

/// What a generator produced: the panel and, for graph waves, the graph.
pub struct Generated {
    pub panel: SignalPanel,
    pub graph: Option<WeightedGraph>,
}

pub fn load_graph(path: &Path) -> Result<WeightedGraph> {
    let json: GraphJson = serde_json::from_reader(File::open(path)?)?;
    WeightedGraph::from_json(&json)
}

impl GeneratorArgs {
    pub fn is_set(&self) -> bool {
        self.demo.is_some() || self.path.is_some() || self.graph.is_some() || self.interval_wave
    }

    pub fn sqrt_c_or_default(&self) -> f64 {
        self.sqrt_c.unwrap_or(DEFAULT_SQRT_C)
    }

    /// Default sample count for this generator.
    fn default_steps(&self) -> usize {
        match self.demo {
            Some(Demo::ThreeTone) => 10,
            Some(Demo::TravellingCosine) => 12,
            Some(Demo::IntervalWave) => 26,
            Some(Demo::PathWave) => 56,
            None if self.interval_wave => 26,
            None => 56,
        }
    }

    fn grid(&self, nodes: usize) -> Vec<f64> {
        let stride = self.grid_stride.max(1) as f64;
        match self.grid {
            Grid::HalfInteger => uniform_grid(0.5, stride, nodes as f64 - 0.5),
            Grid::Integer => uniform_grid(0.0, stride, nodes as f64),
        }
    }

    /// Runs the selected generator for `steps` samples (or its default).
    pub fn generate(&self, steps: Option<usize>) -> Result<Generated> {
        let steps = steps.or(self.steps).unwrap_or_else(|| self.default_steps());
        if steps == 0 {
            return Err(Error::InvalidInput("steps must be positive".into()));
        }
        let sqrt_c = self.sqrt_c_or_default();
        let graph_wave = |g: WeightedGraph| -> Result<Generated> {
            let f = demo_initial_condition(g.n(), self.seed, self.noise)?;
            let ic = WaveInitialCondition::at_rest(f, sqrt_c * sqrt_c)?;
            let panel = simulate_graph_wave(&g, &ic, 1, steps)?;
            Ok(Generated { panel, graph: Some(g) })
        };
        let interval = |nodes: usize| -> Result<Generated> {
            let panel = interval_wave_demo_panel(
                nodes,
                self.terms,
                sqrt_c,
                &self.grid(nodes),
                steps,
                self.seed,
                self.noise,
            )?;
            Ok(Generated { panel, graph: None })
        };
        match self.demo {
            Some(Demo::ThreeTone) => Ok(Generated {
                panel: three_tone_panel(1, steps as i64)?,
                graph: None,
            }),
            Some(Demo::TravellingCosine) => Ok(Generated {
                panel: travelling_cosine_panel(1, steps as i64)?,
                graph: None,
            }),
            Some(Demo::PathWave) => {
                let panel = path_wave_panel(DEMO_PATH_NODES, sqrt_c, steps, self.seed, self.noise)?;
                Ok(Generated {
                    panel,
                    graph: Some(make_path_graph(DEMO_PATH_NODES)?),
                })
            }
            Some(Demo::IntervalWave) => interval(DEMO_PATH_NODES),
            None => {
                if let Some(n) = self.path {
                    graph_wave(make_path_graph(n)?)
                } else if let Some(p) = &self.graph {
                    graph_wave(load_graph(p)?)
                } else if self.interval_wave {
                    interval(self.nodes)
                } else {
                    Err(Error::InvalidInput(
                        "choose a generator: --demo, --path, --graph or --interval-wave".into(),
                    ))
                }
            }
        }
    }
}

impl SourceArgs {
    /// The input panel, or the generator's panel over `steps` samples.
    pub fn panel(&self, steps: Option<usize>) -> Result<SignalPanel> {
        match &self.input {
            Some(path) => SignalPanel::load_csv(path),
            None if self.generator.is_set() => Ok(self.generator.generate(steps)?.panel),
            None => Err(Error::InvalidInput(
                "give --input FILE or a generator such as --demo".into(),
            )),
        }
    }
}
