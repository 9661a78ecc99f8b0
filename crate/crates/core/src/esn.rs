use crate::error::{Error, Result};
use crate::datasets::SeriesData;
use crate::linalg::{DenseMatrix, Matrix};
use crate::states::StateModifier;

/// Elementwise activation applied to the pre-state in each update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }
}

/// Deterministic one-step forecaster supplied by the caller. Its output for
/// input u(t) approximates the next observation and is concatenated with the
/// input before the reservoir projection and with the reservoir state before
/// the readout.
pub trait KnowledgeModel: Send + Sync {
    /// Output dimension; must be constant across calls.
    fn output_dim(&self) -> usize;
    /// Approximate next-step prediction for the given input.
    fn predict_next(&self, input: &[f64]) -> Vec<f64>;
}

/// One reservoir stage: a fixed projection of its drive signal plus a fixed
/// recurrent weight matrix.
pub struct EsnLayer {
    input: DenseMatrix,
    reservoir: Matrix,
}

impl EsnLayer {
    fn new(input: DenseMatrix, reservoir: Matrix) -> Result<Self> {
        if reservoir.rows() != reservoir.cols() {
            return Err(Error::DimensionMismatch(format!(
                "reservoir must be square, got {}x{}",
                reservoir.rows(),
                reservoir.cols()
            )));
        }
        if input.rows() != reservoir.rows() {
            return Err(Error::DimensionMismatch(format!(
                "input projection has {} rows but the reservoir has {}",
                input.rows(),
                reservoir.rows()
            )));
        }
        if !input.values().iter().all(|v| v.is_finite()) || !matrix_is_finite(&reservoir) {
            return Err(Error::InvalidArgument(
                "layer weights must be finite".into(),
            ));
        }
        Ok(Self { input, reservoir })
    }

    pub fn input_matrix(&self) -> &DenseMatrix {
        &self.input
    }

    pub fn reservoir(&self) -> &Matrix {
        &self.reservoir
    }

    pub fn size(&self) -> usize {
        self.reservoir.rows()
    }
}

fn matrix_is_finite(m: &Matrix) -> bool {
    match m {
        Matrix::Dense(d) => d.values().iter().all(|v| v.is_finite()),
        Matrix::Sparse(s) => s.entries().iter().all(|(_, _, v)| v.is_finite()),
    }
}

/// Leaky-integrator mix of the previous state component and the freshly
/// activated drive: (1 - alpha) * previous + alpha * activated. With
/// alpha = 0 the state is untouched; with alpha = 1 it is fully replaced.
pub(crate) fn leaky_mix(previous: f64, activated: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * previous + alpha * activated
}

/// An echo state network: fixed input projection(s) and reservoir(s), a leak
/// rate, an activation, and the state modifier its readout was or will be
/// trained with. Stacked layers make the deep form; an attached knowledge
/// model makes the hybrid form.
pub struct EsnModel {
    layers: Vec<EsnLayer>,
    leak_rate: f64,
    activation: Activation,
    modifier: StateModifier,
    knowledge: Option<Box<dyn KnowledgeModel>>,
    input_dim: usize,
}

impl std::fmt::Debug for EsnModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EsnModel")
            .field("layer_sizes", &self.layers.iter().map(|l| l.size()).collect::<Vec<_>>())
            .field("input_dim", &self.input_dim)
            .field("leak_rate", &self.leak_rate)
            .field("activation", &self.activation)
            .field("modifier", &self.modifier)
            .field("knowledge_dim", &self.knowledge.as_ref().map(|k| k.output_dim()))
            .finish()
    }
}

impl EsnModel {
    /// Single reservoir driven directly by the input series.
    pub fn standard(
        input: DenseMatrix,
        reservoir: Matrix,
        leak_rate: f64,
        activation: Activation,
        modifier: StateModifier,
    ) -> Result<Self> {
        Self::assemble(vec![(input, reservoir)], leak_rate, activation, modifier, None)
    }

    /// Stacked reservoirs: the first layer is driven by the input series,
    /// every later layer by the freshly updated state of the layer below.
    /// Each pair is (projection of the drive, recurrent matrix); projection
    /// l must accept the size of reservoir l-1.
    pub fn deep(
        layers: Vec<(DenseMatrix, Matrix)>,
        leak_rate: f64,
        activation: Activation,
        modifier: StateModifier,
    ) -> Result<Self> {
        Self::assemble(layers, leak_rate, activation, modifier, None)
    }

    /// Single reservoir with an attached knowledge model K. Each update
    /// feeds the reservoir the concatenation [u(t); K(u(t))], so the input
    /// projection must have input_dim + K.output_dim() columns; the state
    /// exposed to the readout is [x(t); K(u(t))].
    pub fn hybrid(
        input: DenseMatrix,
        reservoir: Matrix,
        knowledge: Box<dyn KnowledgeModel>,
        leak_rate: f64,
        activation: Activation,
        modifier: StateModifier,
    ) -> Result<Self> {
        if knowledge.output_dim() == 0 {
            return Err(Error::InvalidArgument(
                "knowledge model must produce at least one output".into(),
            ));
        }
        if input.cols() <= knowledge.output_dim() {
            return Err(Error::DimensionMismatch(format!(
                "input projection has {} columns, not enough for an input \
                 alongside {} knowledge outputs",
                input.cols(),
                knowledge.output_dim()
            )));
        }
        Self::assemble(
            vec![(input, reservoir)],
            leak_rate,
            activation,
            modifier,
            Some(knowledge),
        )
    }

    fn assemble(
        layers: Vec<(DenseMatrix, Matrix)>,
        leak_rate: f64,
        activation: Activation,
        modifier: StateModifier,
        knowledge: Option<Box<dyn KnowledgeModel>>,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument(
                "a model needs at least one layer".into(),
            ));
        }
        if !(leak_rate > 0.0 && leak_rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "leak rate must lie in (0, 1], got {leak_rate}"
            )));
        }
        let built: Vec<EsnLayer> = layers
            .into_iter()
            .map(|(i, r)| EsnLayer::new(i, r))
            .collect::<Result<_>>()?;
        for l in 1..built.len() {
            if built[l].input.cols() != built[l - 1].size() {
                return Err(Error::DimensionMismatch(format!(
                    "layer {} projection accepts {} values but layer {} \
                     produces {}",
                    l,
                    built[l].input.cols(),
                    l - 1,
                    built[l - 1].size()
                )));
            }
        }
        let input_dim = match &knowledge {
            Some(k) => built[0].input.cols() - k.output_dim(),
            None => built[0].input.cols(),
        };
        Ok(Self {
            layers: built,
            leak_rate,
            activation,
            modifier,
            knowledge,
            input_dim,
        })
    }

    /// Dimension of the external input series.
    pub fn input_dimension(&self) -> usize {
        self.input_dim
    }

    /// Length of the state vector propagated through time (all reservoir
    /// units across layers).
    pub fn state_size(&self) -> usize {
        self.layers.iter().map(|l| l.size()).sum()
    }

    /// Length of the state exposed to the modifier and readout: the
    /// propagated state, plus the knowledge outputs for the hybrid form.
    pub fn exposed_state_size(&self) -> usize {
        self.state_size() + self.knowledge.as_ref().map_or(0, |k| k.output_dim())
    }

    pub fn layers(&self) -> &[EsnLayer] {
        &self.layers
    }

    pub fn leak_rate(&self) -> f64 {
        self.leak_rate
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn modifier(&self) -> &StateModifier {
        &self.modifier
    }

    pub fn is_hybrid(&self) -> bool {
        self.knowledge.is_some()
    }

    /// Feature length a readout trained with the given modifier consumes.
    pub fn output_dimension(&self, modifier: &StateModifier) -> usize {
        modifier.feature_len(self.exposed_state_size(), self.input_dim)
    }

    /// One state update: x' = (1 - alpha) x + alpha f(R x + W u), applied
    /// per layer (each layer driven by the updated state below it) and with
    /// the knowledge prediction appended to the drive for the hybrid form.
    pub fn step(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_state_input(x, u)?;
        self.advance_at(x, u, 0)
    }

    fn check_state_input(&self, x: &[f64], u: &[f64]) -> Result<()> {
        if x.len() != self.state_size() {
            return Err(Error::DimensionMismatch(format!(
                "state has length {} but the model carries {} units",
                x.len(),
                self.state_size()
            )));
        }
        if u.len() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "input has length {} but the model expects {}",
                u.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    pub(crate) fn advance_at(&self, x: &[f64], u: &[f64], t: usize) -> Result<Vec<f64>> {
        let hybrid_drive: Vec<f64>;
        let external: &[f64] = match &self.knowledge {
            Some(_) => {
                hybrid_drive = self.hybrid_drive(u, t)?;
                &hybrid_drive
            }
            None => u,
        };
        let mut updated: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut offset = 0;
        for (l, layer) in self.layers.iter().enumerate() {
            let n = layer.size();
            let prev = &x[offset..offset + n];
            let drive: &[f64] = if l == 0 { external } else { &updated[l - 1] };
            let mut recurrent = vec![0.0; n];
            crate::linalg::MatVec::matvec(&layer.reservoir, prev, &mut recurrent);
            let mut projected = vec![0.0; n];
            layer.input.matvec(drive, &mut projected);
            let mut next = vec![0.0; n];
            for i in 0..n {
                let activated = self.activation.apply(recurrent[i] + projected[i]);
                next[i] = leaky_mix(prev[i], activated, self.leak_rate);
            }
            updated.push(next);
            offset += n;
        }
        let state = updated.concat();
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow { step: t });
        }
        Ok(state)
    }

    fn hybrid_drive(&self, u: &[f64], t: usize) -> Result<Vec<f64>> {
        let k = self.knowledge.as_ref().expect("hybrid drive without knowledge model");
        let prediction = k.predict_next(u);
        if prediction.len() != k.output_dim() {
            return Err(Error::DimensionMismatch(format!(
                "knowledge model declared {} outputs but produced {}",
                k.output_dim(),
                prediction.len()
            )));
        }
        if prediction.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow { step: t });
        }
        let mut drive = Vec::with_capacity(u.len() + prediction.len());
        drive.extend_from_slice(u);
        drive.extend_from_slice(&prediction);
        Ok(drive)
    }

    /// State as seen by the modifier and readout: the propagated state, with
    /// the knowledge prediction for the concurrent input appended for the
    /// hybrid form.
    pub(crate) fn exposed_state_at(&self, x: &[f64], u: &[f64], t: usize) -> Result<Vec<f64>> {
        match &self.knowledge {
            Some(_) => {
                let drive = self.hybrid_drive(u, t)?;
                let mut exposed = Vec::with_capacity(self.exposed_state_size());
                exposed.extend_from_slice(x);
                exposed.extend_from_slice(&drive[self.input_dim..]);
                Ok(exposed)
            }
            None => Ok(x.to_vec()),
        }
    }

    /// Runs the recurrence over the whole series from `x0` (zero when not
    /// given), drops the first `washout` states, and records both the raw
    /// retained states and their modified feature vectors, each paired with
    /// the input that produced them.
    pub fn collect_states(
        &self,
        inputs: &SeriesData,
        washout: usize,
        x0: Option<&[f64]>,
    ) -> Result<StateMatrix> {
        if inputs.dims() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "series has {} rows but the model expects {}-dimensional input",
                inputs.dims(),
                self.input_dim
            )));
        }
        let total = inputs.len();
        if washout >= total {
            return Err(Error::InvalidArgument(format!(
                "washout {washout} must be smaller than the series length {total}"
            )));
        }
        let mut x = match x0 {
            Some(start) => {
                if start.len() != self.state_size() {
                    return Err(Error::DimensionMismatch(format!(
                        "initial state has length {} but the model carries {} units",
                        start.len(),
                        self.state_size()
                    )));
                }
                start.to_vec()
            }
            None => vec![0.0; self.state_size()],
        };
        let kept = total - washout;
        let mut raw = DenseMatrix::zeros(self.exposed_state_size(), kept);
        let mut features = DenseMatrix::zeros(self.output_dimension(&self.modifier), kept);
        for t in 0..total {
            let u = inputs.values.column(t);
            x = self.advance_at(&x, &u, t)?;
            if t >= washout {
                let exposed = self.exposed_state_at(&x, &u, t)?;
                let z = self.modifier.apply(&exposed, &u)?;
                raw.set_column(t - washout, &exposed);
                features.set_column(t - washout, &z);
            }
        }
        Ok(StateMatrix {
            features,
            raw_states: raw,
            washout,
        })
    }
}

/// Collected reservoir trajectories: `features` feeds readout training,
/// `raw_states` keeps the unmodified states, one column per retained step.
#[derive(Debug, Clone)]
pub struct StateMatrix {
    pub features: DenseMatrix,
    pub raw_states: DenseMatrix,
    pub washout: usize,
}

impl StateMatrix {
    /// Number of retained timesteps.
    pub fn len(&self) -> usize {
        self.features.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.cols() == 0
    }

    /// Raw state column for the last retained step.
    pub fn final_raw_state(&self) -> Vec<f64> {
        self.raw_states.column(self.raw_states.cols() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{BaseModifier, Nonlinear};

    fn series(rows: usize, values: Vec<f64>) -> SeriesData {
        let cols = values.len() / rows;
        SeriesData::new(DenseMatrix::new(rows, cols, values).unwrap(), 1.0, "test").unwrap()
    }

    #[test]
    fn scalar_step_matches_hand_computation() {
        let model = EsnModel::standard(
            DenseMatrix::new(1, 1, vec![1.0]).unwrap(),
            DenseMatrix::new(1, 1, vec![0.5]).unwrap().into(),
            0.7,
            Activation::Tanh,
            StateModifier::plain(),
        )
        .unwrap();
        let next = model.step(&[0.2], &[0.1]).unwrap();
        let expected = 0.3 * 0.2 + 0.7 * (0.5 * 0.2 + 1.0 * 0.1f64).tanh();
        assert!((next[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_leak_keeps_state_untouched() {
        assert_eq!(leaky_mix(0.42, 9.0, 0.0), 0.42);
        assert_eq!(leaky_mix(-1.5, 100.0, 0.0), -1.5);
    }

    #[test]
    fn full_leak_replaces_state() {
        assert_eq!(leaky_mix(0.42, 9.0, 1.0), 9.0);
    }

    #[test]
    fn zero_reservoir_zero_input_gives_zero_state() {
        let model = EsnModel::standard(
            DenseMatrix::identity(2),
            DenseMatrix::zeros(2, 2).into(),
            1.0,
            Activation::Tanh,
            StateModifier::plain(),
        )
        .unwrap();
        let next = model.step(&[0.3, -0.2], &[0.0, 0.0]).unwrap();
        assert_eq!(next, vec![0.0, 0.0]);
    }

    #[test]
    fn leak_rate_outside_unit_interval_is_rejected() {
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            let r = EsnModel::standard(
                DenseMatrix::identity(2),
                DenseMatrix::zeros(2, 2).into(),
                bad,
                Activation::Tanh,
                StateModifier::plain(),
            );
            assert!(r.is_err(), "leak rate {bad} should be rejected");
        }
    }

    #[test]
    fn collected_states_match_hand_rollout() {
        // 2 units, 1 input, 5 steps, washout 2; independent rollout below
        // uses plain scalar arithmetic.
        let w_in = [0.3, -0.2];
        let r = [[0.1, 0.05], [-0.07, 0.12]];
        let us = [0.5, -0.4, 0.9, 0.2, -0.6];
        let alpha = 0.8;

        let model = EsnModel::standard(
            DenseMatrix::new(2, 1, w_in.to_vec()).unwrap(),
            DenseMatrix::new(2, 2, vec![r[0][0], r[0][1], r[1][0], r[1][1]])
                .unwrap()
                .into(),
            alpha,
            Activation::Tanh,
            StateModifier::plain(),
        )
        .unwrap();
        let sm = model
            .collect_states(&series(1, us.to_vec()), 2, None)
            .unwrap();
        assert_eq!(sm.features.cols(), 3);
        assert_eq!(sm.raw_states.cols(), 3);

        let mut x = [0.0f64, 0.0];
        let mut kept = Vec::new();
        for (t, &u) in us.iter().enumerate() {
            let p0 = (r[0][0] * x[0] + r[0][1] * x[1] + w_in[0] * u).tanh();
            let p1 = (r[1][0] * x[0] + r[1][1] * x[1] + w_in[1] * u).tanh();
            x = [
                (1.0 - alpha) * x[0] + alpha * p0,
                (1.0 - alpha) * x[1] + alpha * p1,
            ];
            if t >= 2 {
                kept.push(x);
            }
        }
        for (col, expect) in kept.iter().enumerate() {
            assert_eq!(sm.features.get(0, col), expect[0]);
            assert_eq!(sm.features.get(1, col), expect[1]);
            assert_eq!(sm.raw_states.get(0, col), expect[0]);
        }
    }

    #[test]
    fn washout_boundary_keeps_one_column() {
        let model = EsnModel::standard(
            DenseMatrix::new(2, 1, vec![0.1, 0.2]).unwrap(),
            DenseMatrix::zeros(2, 2).into(),
            1.0,
            Activation::Tanh,
            StateModifier::plain(),
        )
        .unwrap();
        let sm = model
            .collect_states(&series(1, vec![1.0, 2.0, 3.0]), 2, None)
            .unwrap();
        assert_eq!(sm.len(), 1);
        let bad = model.collect_states(&series(1, vec![1.0, 2.0, 3.0]), 3, None);
        assert!(bad.is_err());
    }

    #[test]
    fn single_layer_deep_equals_standard_bitwise() {
        let w_in = DenseMatrix::new(3, 2, vec![0.3, -0.2, 0.11, 0.07, -0.5, 0.21]).unwrap();
        let res = DenseMatrix::new(
            3,
            3,
            vec![0.1, -0.2, 0.0, 0.05, 0.12, -0.3, 0.2, 0.0, 0.09],
        )
        .unwrap();
        let inputs = series(2, vec![0.5, -0.4, 0.9, 0.2, -0.6, 0.33, 0.1, -0.8]);
        let modifier =
            StateModifier::new(BaseModifier::Extended, Nonlinear::T1, 1.0).unwrap();

        let standard = EsnModel::standard(
            w_in.clone(),
            res.clone().into(),
            0.6,
            Activation::Tanh,
            modifier,
        )
        .unwrap();
        let deep = EsnModel::deep(
            vec![(w_in, res.into())],
            0.6,
            Activation::Tanh,
            modifier,
        )
        .unwrap();

        let a = standard.collect_states(&inputs, 1, None).unwrap();
        let b = deep.collect_states(&inputs, 1, None).unwrap();
        assert_eq!(a.features.values(), b.features.values());
        assert_eq!(a.raw_states.values(), b.raw_states.values());
    }

    #[test]
    fn two_layer_rollout_uses_updated_lower_state() {
        // scalar layers with identity activation so the chain is explicit
        let (a, r1) = (0.4, 0.25);
        let (b, r2) = (-0.3, 0.5);
        let alpha = 0.9;
        let us = [1.0, -2.0, 0.5];

        let model = EsnModel::deep(
            vec![
                (
                    DenseMatrix::new(1, 1, vec![a]).unwrap(),
                    DenseMatrix::new(1, 1, vec![r1]).unwrap().into(),
                ),
                (
                    DenseMatrix::new(1, 1, vec![b]).unwrap(),
                    DenseMatrix::new(1, 1, vec![r2]).unwrap().into(),
                ),
            ],
            alpha,
            Activation::Identity,
            StateModifier::plain(),
        )
        .unwrap();
        let sm = model
            .collect_states(&series(1, us.to_vec()), 0, None)
            .unwrap();

        let (mut x1, mut x2) = (0.0f64, 0.0f64);
        for (t, &u) in us.iter().enumerate() {
            x1 = (1.0 - alpha) * x1 + alpha * (r1 * x1 + a * u);
            x2 = (1.0 - alpha) * x2 + alpha * (r2 * x2 + b * x1);
            assert_eq!(sm.raw_states.get(0, t), x1);
            assert_eq!(sm.raw_states.get(1, t), x2);
        }
    }

    #[test]
    fn deep_chain_dimension_mismatch_is_rejected() {
        let r = EsnModel::deep(
            vec![
                (DenseMatrix::zeros(3, 1), DenseMatrix::zeros(3, 3).into()),
                (DenseMatrix::zeros(2, 4), DenseMatrix::zeros(2, 2).into()),
            ],
            0.5,
            Activation::Tanh,
            StateModifier::plain(),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    struct AffineForecast;

    impl KnowledgeModel for AffineForecast {
        fn output_dim(&self) -> usize {
            2
        }
        fn predict_next(&self, input: &[f64]) -> Vec<f64> {
            vec![2.0 * input[0], input[0] + 1.0]
        }
    }

    #[test]
    fn hybrid_exposes_knowledge_outputs_verbatim() {
        let w_in = DenseMatrix::new(3, 3, vec![0.2; 9]).unwrap();
        let res = DenseMatrix::new(3, 3, vec![0.05; 9]).unwrap();
        let model = EsnModel::hybrid(
            w_in,
            res.into(),
            Box::new(AffineForecast),
            0.7,
            Activation::Tanh,
            StateModifier::plain(),
        )
        .unwrap();
        assert_eq!(model.input_dimension(), 1);
        assert_eq!(model.state_size(), 3);
        assert_eq!(model.exposed_state_size(), 5);

        let us = [0.5, -0.25, 0.75];
        let sm = model
            .collect_states(&series(1, us.to_vec()), 0, None)
            .unwrap();
        assert_eq!(sm.raw_states.rows(), 5);
        for (t, &u) in us.iter().enumerate() {
            assert_eq!(sm.raw_states.get(3, t), 2.0 * u);
            assert_eq!(sm.raw_states.get(4, t), u + 1.0);
        }
    }

    #[test]
    fn hybrid_state_equals_standard_on_concatenated_drive() {
        let w_in = DenseMatrix::new(3, 3, vec![0.3, -0.1, 0.2, 0.15, 0.4, -0.3, -0.2, 0.1, 0.25])
            .unwrap();
        let res =
            DenseMatrix::new(3, 3, vec![0.1, 0.0, -0.2, 0.05, 0.12, 0.0, 0.0, -0.07, 0.09])
                .unwrap();
        let hybrid = EsnModel::hybrid(
            w_in.clone(),
            res.clone().into(),
            Box::new(AffineForecast),
            0.8,
            Activation::Tanh,
            StateModifier::plain(),
        )
        .unwrap();

        let us = [0.5, -0.4, 0.9, 0.2];
        let hybrid_states = hybrid
            .collect_states(&series(1, us.to_vec()), 0, None)
            .unwrap();

        // the same reservoir driven by the explicit concatenation [u; K(u)]
        let standard = EsnModel::standard(
            w_in,
            res.into(),
            0.8,
            Activation::Tanh,
            StateModifier::plain(),
        )
        .unwrap();
        let mut driven = Vec::new();
        for &u in &us {
            driven.push(u);
        }
        for &u in &us {
            driven.push(2.0 * u);
        }
        for &u in &us {
            driven.push(u + 1.0);
        }
        let standard_states = standard
            .collect_states(&series(3, driven), 0, None)
            .unwrap();
        for t in 0..us.len() {
            for i in 0..3 {
                assert_eq!(
                    hybrid_states.raw_states.get(i, t),
                    standard_states.raw_states.get(i, t)
                );
            }
        }
    }

    #[test]
    fn washout_drops_exactly_the_leading_columns() {
        let w_in = DenseMatrix::new(2, 1, vec![0.4, -0.3]).unwrap();
        let res = DenseMatrix::new(2, 2, vec![0.2, -0.1, 0.05, 0.15]).unwrap();
        let inputs = series(1, vec![0.1, 0.5, -0.2, 0.8, -0.6, 0.3, 0.05]);
        let model = EsnModel::standard(
            w_in,
            res.into(),
            0.75,
            Activation::Tanh,
            StateModifier::new(BaseModifier::Padded, Nonlinear::None, 1.0).unwrap(),
        )
        .unwrap();
        let all = model.collect_states(&inputs, 0, None).unwrap();
        let trimmed = model.collect_states(&inputs, 3, None).unwrap();
        assert_eq!(trimmed.len(), all.len() - 3);
        for col in 0..trimmed.len() {
            assert_eq!(
                trimmed.features.column(col),
                all.features.column(col + 3)
            );
        }
    }

    #[test]
    fn output_dimension_follows_the_modifier() {
        let make = |modifier| {
            EsnModel::standard(
                DenseMatrix::zeros(100, 3),
                DenseMatrix::zeros(100, 100).into(),
                1.0,
                Activation::Tanh,
                modifier,
            )
            .unwrap()
        };
        let plain = make(StateModifier::plain());
        assert_eq!(plain.output_dimension(plain.modifier()), 100);
        let extended =
            make(StateModifier::new(BaseModifier::Extended, Nonlinear::None, 1.0).unwrap());
        assert_eq!(extended.output_dimension(extended.modifier()), 103);
        let padded =
            make(StateModifier::new(BaseModifier::Padded, Nonlinear::None, 1.0).unwrap());
        assert_eq!(padded.output_dimension(padded.modifier()), 101);
    }

    #[test]
    fn overflowing_drive_reports_the_step() {
        let model = EsnModel::standard(
            DenseMatrix::new(1, 1, vec![1.0]).unwrap(),
            DenseMatrix::new(1, 1, vec![0.5]).unwrap().into(),
            1.0,
            Activation::Identity,
            StateModifier::plain(),
        )
        .unwrap();
        let inputs = series(1, vec![0.0, f64::MAX, f64::MAX]);
        match model.collect_states(&inputs, 0, None) {
            // step 1 leaves the state at f64::MAX; step 2 adds to it
            Err(Error::NumericOverflow { step }) => assert_eq!(step, 2),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let model = EsnModel::standard(
            DenseMatrix::new(2, 1, vec![0.1, 0.2]).unwrap(),
            DenseMatrix::zeros(2, 2).into(),
            1.0,
            Activation::Tanh,
            StateModifier::plain(),
        )
        .unwrap();
        assert!(model.step(&[0.0], &[0.0]).is_err());
        assert!(model.step(&[0.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(model
            .collect_states(&series(2, vec![0.0, 0.0]), 0, None)
            .is_err());
        assert!(model
            .collect_states(&series(1, vec![0.0, 0.0]), 0, Some(&[1.0]))
            .is_err());
    }
}
