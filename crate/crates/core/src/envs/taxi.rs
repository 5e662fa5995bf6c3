//! The taxi domain as a factored MDP.
//!
//! State variables: taxi cell, passenger location (one of four landmarks or
//! in the taxi) and destination landmark. The grid is the classic 5x5 layout,
//! optionally scaled in both place dimensions.

use std::collections::HashSet;

use super::{merge_outcomes, slip_directions, Action, Cell, Dir, EnvError, Environment, GridView};
use crate::codec::{DomainSpec, EncodedState, FactoredState};
use crate::scalar::Scalar;

pub const NORTH: Action = 0;
pub const SOUTH: Action = 1;
pub const EAST: Action = 2;
pub const WEST: Action = 3;
pub const PICKUP: Action = 4;
pub const PUTDOWN: Action = 5;
const ACTION_NAMES: [&str; 6] = ["north", "south", "east", "west", "pickup", "putdown"];

pub const LANDMARK_NAMES: [char; 4] = ['R', 'G', 'Y', 'B'];
const BASE_LANDMARKS: [Cell; 4] = [(0, 0), (4, 0), (0, 4), (3, 4)];
// (column boundary, row): a wall between x = boundary - 1 and x = boundary
const BASE_WALLS: [(usize, usize); 6] = [(2, 0), (2, 1), (1, 3), (1, 4), (3, 3), (3, 4)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Passenger {
    At(usize),
    InTaxi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaxiState {
    pub taxi: Cell,
    pub passenger: Passenger,
    pub destination: usize,
}

#[derive(Debug, Clone)]
pub struct Taxi {
    size: usize,
    landmarks: [Cell; 4],
    // blocked eastward crossings, by the western cell
    east_walls: HashSet<Cell>,
    start: TaxiState,
    slip: f64,
    domain: DomainSpec,
}

impl Taxi {
    /// `scale = 1` is the 5x5 grid; `scale = 4` the 20x20 variant.
    pub fn new(scale: usize, slip: f64) -> Result<Self, EnvError> {
        if scale == 0 {
            return Err(EnvError::Config("scale must be positive".into()));
        }
        let size = 5 * scale;
        let landmarks = BASE_LANDMARKS.map(|(x, y)| (x * scale, y * scale));
        let mut east_walls = HashSet::new();
        for (boundary, row) in BASE_WALLS {
            for dy in 0..scale {
                east_walls.insert((boundary * scale - 1, row * scale + dy));
            }
        }
        let domain = DomainSpec::new(vec![size * size, 5, 4])?;
        Ok(Taxi {
            size,
            landmarks,
            east_walls,
            start: TaxiState {
                taxi: (size / 2, size / 2),
                passenger: Passenger::At(0),
                destination: 1,
            },
            slip,
            domain,
        })
    }

    pub fn with_task(&self, taxi: Cell, pickup: usize, destination: usize) -> Result<Self, EnvError> {
        if taxi.0 >= self.size || taxi.1 >= self.size || pickup > 3 || destination > 3 {
            return Err(EnvError::Config(format!(
                "bad task: taxi {taxi:?}, pickup {pickup}, destination {destination}"
            )));
        }
        Ok(Taxi {
            start: TaxiState {
                taxi,
                passenger: Passenger::At(pickup),
                destination,
            },
            ..self.clone()
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn landmarks(&self) -> &[Cell; 4] {
        &self.landmarks
    }

    fn blocked(&self, from: Cell, d: Dir) -> bool {
        match d {
            Dir::Right => self.east_walls.contains(&from),
            Dir::Left => from.0 > 0 && self.east_walls.contains(&(from.0 - 1, from.1)),
            _ => false,
        }
    }

    fn move_from(&self, pos: Cell, d: Dir) -> Cell {
        let (dx, dy) = d.delta();
        let (nx, ny) = (pos.0 as isize + dx, pos.1 as isize + dy);
        if nx < 0 || ny < 0 || nx as usize >= self.size || ny as usize >= self.size || self.blocked(pos, d) {
            pos
        } else {
            (nx as usize, ny as usize)
        }
    }

    fn to_factored(&self, s: &TaxiState) -> FactoredState {
        let cell = s.taxi.1 * self.size + s.taxi.0 + 1;
        let p = match s.passenger {
            Passenger::At(i) => i + 1,
            Passenger::InTaxi => 5,
        };
        FactoredState::new(vec![cell, p, s.destination + 1])
    }

    fn delivered(&self, s: &TaxiState) -> bool {
        s.passenger == Passenger::At(s.destination) && s.taxi == self.landmarks[s.destination]
    }
}

impl<T: Scalar> Environment<T> for Taxi {
    type State = TaxiState;

    fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn encode(&self, s: &TaxiState) -> EncodedState {
        self.domain
            .encode(&self.to_factored(s))
            .expect("taxi state within domain")
    }

    fn decode(&self, l: EncodedState) -> Result<TaxiState, EnvError> {
        let f = self.domain.decode(l)?;
        let d = f.digits();
        let cell = d[0] - 1;
        Ok(TaxiState {
            taxi: (cell % self.size, cell / self.size),
            passenger: if d[1] == 5 {
                Passenger::InTaxi
            } else {
                Passenger::At(d[1] - 1)
            },
            destination: d[2] - 1,
        })
    }

    fn num_actions(&self) -> usize {
        6
    }

    fn action_name(&self, a: Action) -> String {
        ACTION_NAMES.get(a).map_or_else(|| a.to_string(), |s| s.to_string())
    }

    fn start(&self) -> TaxiState {
        self.start
    }

    fn transition_distribution(
        &self,
        s: &TaxiState,
        a: Action,
    ) -> Result<Vec<(TaxiState, T)>, EnvError> {
        <Self as Environment<T>>::check_action(self, a)?;
        let mut next = *s;
        match a {
            PICKUP => {
                if let Passenger::At(i) = s.passenger {
                    if self.landmarks[i] == s.taxi {
                        next.passenger = Passenger::InTaxi;
                    }
                }
                Ok(vec![(next, T::one())])
            }
            PUTDOWN => {
                if s.passenger == Passenger::InTaxi && s.taxi == self.landmarks[s.destination] {
                    next.passenger = Passenger::At(s.destination);
                }
                Ok(vec![(next, T::one())])
            }
            _ => {
                let intended = [Dir::Up, Dir::Down, Dir::Right, Dir::Left][a];
                let outcomes = slip_directions::<T>(intended, self.slip)
                    .into_iter()
                    .map(|(d, p)| {
                        (
                            TaxiState {
                                taxi: self.move_from(s.taxi, d),
                                ..*s
                            },
                            p,
                        )
                    })
                    .collect();
                Ok(merge_outcomes(outcomes))
            }
        }
    }

    fn reward(&self, s: &TaxiState, a: Action, next: &TaxiState) -> T {
        match a {
            PICKUP => {
                if next.passenger == Passenger::InTaxi && s.passenger != Passenger::InTaxi {
                    -T::one()
                } else {
                    T::of(-10.0)
                }
            }
            PUTDOWN => {
                if <Self as Environment<T>>::is_terminal(self, s, a, next) {
                    T::of(20.0)
                } else {
                    T::of(-10.0)
                }
            }
            _ => -T::one(),
        }
    }

    fn is_terminal(&self, s: &TaxiState, a: Action, next: &TaxiState) -> bool {
        a == PUTDOWN && s.passenger == Passenger::InTaxi && self.delivered(next)
    }
}

impl GridView for Taxi {
    fn grid_dims(&self) -> (usize, usize) {
        (self.size, self.size)
    }

    fn cell_of(&self, l: EncodedState) -> Option<Cell> {
        <Self as Environment<f64>>::decode(self, l).ok().map(|s| s.taxi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(env: &Taxi, s: TaxiState, a: Action) -> (TaxiState, f64, bool) {
        let d: Vec<(TaxiState, f64)> = env.transition_distribution(&s, a).unwrap();
        let next = d[0].0;
        (next, env.reward(&s, a, &next), Environment::<f64>::is_terminal(env, &s, a, &next))
    }

    #[test]
    fn state_space_is_500() {
        let env = Taxi::new(1, 0.2).unwrap();
        assert_eq!(Environment::<f64>::domain(&env).size(), 500);
        let s = TaxiState {
            taxi: (3, 2),
            passenger: Passenger::InTaxi,
            destination: 2,
        };
        let l = Environment::<f64>::encode(&env, &s);
        assert_eq!(Environment::<f64>::decode(&env, l).unwrap(), s);
    }

    #[test]
    fn wrong_pickup_costs_ten_and_does_not_move() {
        let env = Taxi::new(1, 0.2).unwrap().with_task((2, 2), 0, 1).unwrap();
        let s = env.start;
        let (next, r, t) = step(&env, s, PICKUP);
        assert_eq!(next, s);
        assert_eq!(r, -10.0);
        assert!(!t);
    }

    #[test]
    fn successful_delivery() {
        let env = Taxi::new(1, 0.0).unwrap().with_task((0, 0), 0, 1).unwrap();
        let (s, r, _) = step(&env, env.start, PICKUP);
        assert_eq!(s.passenger, Passenger::InTaxi);
        assert_eq!(r, -1.0);
        let at_g = TaxiState { taxi: (4, 0), ..s };
        let (done, r, t) = step(&env, at_g, PUTDOWN);
        assert!(t);
        assert_eq!(r, 20.0);
        assert_eq!(done.passenger, Passenger::At(1));
        // putdown elsewhere
        let (_, r, t) = step(&env, s, PUTDOWN);
        assert_eq!(r, -10.0);
        assert!(!t);
    }

    #[test]
    fn walls_block_moves() {
        let env = Taxi::new(1, 0.0).unwrap();
        let s = TaxiState {
            taxi: (1, 0),
            passenger: Passenger::At(0),
            destination: 1,
        };
        assert_eq!(step(&env, s, EAST).0.taxi, (1, 0));
        let s = TaxiState { taxi: (2, 0), ..s };
        assert_eq!(step(&env, s, WEST).0.taxi, (2, 0));
        let s = TaxiState { taxi: (2, 2), ..s };
        assert_eq!(step(&env, s, WEST).0.taxi, (1, 2));
        assert_eq!(step(&env, s, NORTH).0.taxi, (2, 1));
        let s = TaxiState { taxi: (0, 4), ..s };
        assert_eq!(step(&env, s, EAST).0.taxi, (0, 4));
        assert_eq!(step(&env, s, SOUTH).0.taxi, (0, 4));
    }

    #[test]
    fn scaled_variant() {
        let env = Taxi::new(4, 0.2).unwrap();
        assert_eq!(env.size(), 20);
        assert_eq!(env.landmarks()[3], (12, 16));
        assert_eq!(Environment::<f64>::domain(&env).size(), 400 * 20);
        let s = TaxiState {
            taxi: (7, 3),
            passenger: Passenger::At(0),
            destination: 1,
        };
        let d: Vec<(TaxiState, f64)> = env.transition_distribution(&s, EAST).unwrap();
        // east is blocked, so the intended move and the east slip stay put
        let stay = d.iter().find(|(n, _)| n.taxi == (7, 3)).unwrap().1;
        assert!((stay - 0.85).abs() < 1e-12);
    }
}
