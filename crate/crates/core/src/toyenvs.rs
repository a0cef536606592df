//! Bundled log generators.
//!
//! The gridworld emits the agent's `(x, y)` offset from its start tile
//! (`x` grows to the right, `y` grows downward). The agent's facing is
//! internal, so rotations show up as repeated states. The cliff world is a
//! bounded 2-D random walk whose right-hand band is fatal.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::log_model::{Episode, FeatureSchema, TransitionLog, TransitionRecord};

/// Start cell separated from lava two tiles to its right by a wall; the lava
/// is only reachable by a long detour.
pub const BLOCKED_CORRIDOR: &str = include_str!("../maps/blocked_corridor.txt");
/// A single corridor running right from the start and ending in lava.
pub const STRAIGHT_CORRIDOR: &str = include_str!("../maps/straight_corridor.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tile {
    Passable,
    Wall,
    Lava,
    Goal,
    Start,
}

impl Tile {
    fn from_char(c: char) -> Option<Tile> {
        Some(match c {
            '.' => Tile::Passable,
            '#' => Tile::Wall,
            'L' => Tile::Lava,
            'G' => Tile::Goal,
            'S' => Tile::Start,
            _ => return None,
        })
    }

    fn as_char(self) -> char {
        match self {
            Tile::Passable => '.',
            Tile::Wall => '#',
            Tile::Lava => 'L',
            Tile::Goal => 'G',
            Tile::Start => 'S',
        }
    }

    pub fn ends_episode(self) -> bool {
        matches!(self, Tile::Lava | Tile::Goal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    rows: usize,
    cols: usize,
    tiles: Vec<Tile>,
    start: (usize, usize),
}

impl FromStr for GridMap {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        let rows = lines.len();
        if rows == 0 {
            return Err(Error::InvalidMap("map is empty".into()));
        }
        let cols = lines[0].chars().count();
        let mut tiles = Vec::with_capacity(rows * cols);
        let mut start = None;
        for (r, line) in lines.iter().enumerate() {
            if line.chars().count() != cols {
                return Err(Error::InvalidMap(format!(
                    "row {r} has {} tiles, expected {cols}",
                    line.chars().count()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                let tile = Tile::from_char(ch).ok_or_else(|| {
                    Error::InvalidMap(format!("unknown tile '{ch}' at row {r}, column {c}"))
                })?;
                if tile == Tile::Start {
                    if start.is_some() {
                        return Err(Error::InvalidMap("more than one start tile".into()));
                    }
                    start = Some((c, r));
                }
                let border = r == 0 || c == 0 || r + 1 == rows || c + 1 == cols;
                if border && tile != Tile::Wall {
                    return Err(Error::InvalidMap(format!(
                        "border tile at row {r}, column {c} is not a wall"
                    )));
                }
                tiles.push(tile);
            }
        }
        let start = start.ok_or_else(|| Error::InvalidMap("no start tile".into()))?;
        Ok(GridMap {
            rows,
            cols,
            tiles,
            start,
        })
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| self.tiles[r * self.cols + c].as_char())
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl GridMap {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))?
            .parse()
    }

    pub fn blocked_corridor() -> Self {
        BLOCKED_CORRIDOR.parse().expect("bundled map is valid")
    }

    pub fn straight_corridor() -> Self {
        STRAIGHT_CORRIDOR.parse().expect("bundled map is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Start tile as `(column, row)`.
    pub fn start(&self) -> (usize, usize) {
        self.start
    }

    pub fn tile(&self, col: usize, row: usize) -> Option<Tile> {
        (col < self.cols && row < self.rows).then(|| self.tiles[row * self.cols + col])
    }

    /// Tile at an offset from the start tile; `None` outside the map.
    pub fn tile_at_offset(&self, dx: i64, dy: i64) -> Option<Tile> {
        let col = self.start.0 as i64 + dx;
        let row = self.start.1 as i64 + dy;
        if col < 0 || row < 0 {
            return None;
        }
        self.tile(col as usize, row as usize)
    }

    pub fn schema() -> FeatureSchema {
        FeatureSchema::new(["x", "y"]).expect("static schema")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facing {
    North,
    East,
    South,
    West,
}

impl Facing {
    fn delta(self) -> (i64, i64) {
        match self {
            Facing::North => (0, -1),
            Facing::East => (1, 0),
            Facing::South => (0, 1),
            Facing::West => (-1, 0),
        }
    }

    fn left(self) -> Facing {
        match self {
            Facing::North => Facing::West,
            Facing::West => Facing::South,
            Facing::South => Facing::East,
            Facing::East => Facing::North,
        }
    }

    fn right(self) -> Facing {
        match self {
            Facing::North => Facing::East,
            Facing::East => Facing::South,
            Facing::South => Facing::West,
            Facing::West => Facing::North,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Forward,
    RotateLeft,
    RotateRight,
}

const ACTIONS: [Action; 3] = [Action::Forward, Action::RotateLeft, Action::RotateRight];

/// Agent state inside a map. Episodes start on the start tile facing south.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridAgent {
    pub x: i64,
    pub y: i64,
    pub facing: Facing,
}

impl Default for GridAgent {
    fn default() -> Self {
        GridAgent {
            x: 0,
            y: 0,
            facing: Facing::South,
        }
    }
}

impl GridAgent {
    /// Applies an action and returns the tile the agent stands on after it.
    /// Moving into a wall leaves the agent in place.
    pub fn step(&mut self, map: &GridMap, action: Action) -> Tile {
        match action {
            Action::RotateLeft => self.facing = self.facing.left(),
            Action::RotateRight => self.facing = self.facing.right(),
            Action::Forward => {
                let (dx, dy) = self.facing.delta();
                match map.tile_at_offset(self.x + dx, self.y + dy) {
                    Some(Tile::Wall) | None => {}
                    Some(_) => {
                        self.x += dx;
                        self.y += dy;
                    }
                }
            }
        }
        map.tile_at_offset(self.x, self.y)
            .expect("agent stays inside the map")
    }

    fn state(&self) -> Vec<f64> {
        vec![self.x as f64, self.y as f64]
    }
}

fn grid_episode(
    map: &GridMap,
    id: String,
    max_steps: usize,
    mut next_action: impl FnMut() -> Option<Action>,
) -> Episode {
    let mut agent = GridAgent::default();
    let mut records = vec![TransitionRecord {
        episode_id: id.clone(),
        step: 0,
        state: agent.state(),
        fatal: false,
        terminal: false,
    }];
    while records.len() < max_steps {
        let Some(action) = next_action() else { break };
        let tile = agent.step(map, action);
        records.push(TransitionRecord {
            episode_id: id.clone(),
            step: records.len() as u64,
            state: agent.state(),
            fatal: tile == Tile::Lava,
            terminal: tile.ends_episode(),
        });
        if tile.ends_episode() {
            break;
        }
    }
    Episode { id, records }
}

/// Uniform random policy over forward / rotate-left / rotate-right.
/// Each episode holds at most `max_steps` records.
pub fn grid_generate(map: &GridMap, episodes: usize, max_steps: usize, seed: u64) -> Result<TransitionLog> {
    if max_steps == 0 {
        return Err(Error::InvalidLog("max_steps must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let episodes = (0..episodes)
        .map(|i| {
            grid_episode(map, format!("grid-{i}"), max_steps, || {
                Some(ACTIONS[rng.gen_range(0..ACTIONS.len())])
            })
        })
        .collect();
    TransitionLog::new(GridMap::schema(), episodes)
}

/// Plays a scripted action sequence as one episode, stopping early if the
/// agent reaches lava or the goal.
pub fn grid_rollout(map: &GridMap, actions: &[Action]) -> Result<TransitionLog> {
    let mut script = actions.iter().copied();
    let episode = grid_episode(map, "scripted".into(), usize::MAX, || script.next());
    TransitionLog::new(GridMap::schema(), vec![episode])
}

/// Fatal band of the cliff world.
pub const CLIFF_EDGE: f64 = 0.9;
const CLIFF_STEP: f64 = 0.1;

/// Random walk in the unit square. Starts uniformly in `[0, 0.5] × [0, 1]`,
/// moves by a uniform offset in `[-0.1, 0.1]²` per step (clamped to the
/// square), and dies once `x > 0.9`.
pub fn cliff_generate(episodes: usize, max_steps: usize, seed: u64) -> Result<TransitionLog> {
    if max_steps == 0 {
        return Err(Error::InvalidLog("max_steps must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = FeatureSchema::new(["x", "y"]).expect("static schema");
    let episodes = (0..episodes)
        .map(|i| {
            let id = format!("cliff-{i}");
            let mut pos = [rng.gen_range(0.0..=0.5), rng.gen_range(0.0..=1.0)];
            let mut records = Vec::new();
            loop {
                let fatal = pos[0] > CLIFF_EDGE;
                records.push(TransitionRecord {
                    episode_id: id.clone(),
                    step: records.len() as u64,
                    state: pos.to_vec(),
                    fatal,
                    terminal: fatal,
                });
                if fatal || records.len() >= max_steps {
                    break;
                }
                for p in &mut pos {
                    *p = (*p + rng.gen_range(-CLIFF_STEP..=CLIFF_STEP)).clamp(0.0, 1.0);
                }
            }
            Episode { id, records }
        })
        .collect();
    TransitionLog::new(schema, episodes)
}
