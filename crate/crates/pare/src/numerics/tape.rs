use crate::error::{PareError, Result};
use crate::numerics::params::ParamStore;
use crate::numerics::tensor::Tensor;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

/// Elementwise activation applied by [`Tape::affine`] and [`Tape::unary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    None,
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::None => x,
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    // Derivative expressed in terms of the activation output.
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::None => 1.0,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

enum Op {
    /// Constant input; no gradient.
    Input,
    /// Leaf bound to a named parameter in a [`ParamStore`].
    Param(String),
    /// `act(x · W + b)` with `x: [n]`, `W: [n, m]`, `b: [m]`.
    Affine {
        x: NodeId,
        w: NodeId,
        b: NodeId,
        act: Activation,
    },
    Concat {
        parts: Vec<NodeId>,
    },
    /// Elementwise sum of same-shaped tensors.
    Sum {
        parts: Vec<NodeId>,
    },
    Sub {
        a: NodeId,
        b: NodeId,
    },
    /// Hadamard product.
    Mul {
        a: NodeId,
        b: NodeId,
    },
    Unary {
        x: NodeId,
        act: Activation,
    },
    /// Sum of selected rows of a 2-D table (multi-hot embedding lookup).
    EmbedSum {
        table: NodeId,
        rows: Vec<usize>,
    },
    /// Subvector pick: `y[j] = x[indices[j]]`.
    Gather {
        x: NodeId,
        indices: Vec<usize>,
    },
    Softmax {
        x: NodeId,
    },
    /// Inner product of two equal-length vectors, producing a scalar.
    Dot {
        a: NodeId,
        b: NodeId,
    },
    Scale {
        x: NodeId,
        factor: f64,
    },
    /// `(target - pred)^2` for a scalar prediction and a constant target.
    SquaredError {
        pred: NodeId,
        target: f64,
    },
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Record of a forward computation supporting exact reverse-mode gradients.
///
/// All vectors use the row convention: `affine(x, w, b)` computes
/// `x · W + b` where `x` is a row vector `[n]` and `W` is stored `[n, m]`.
/// Every module in the crate follows this convention.
///
/// Forward values are computed eagerly when a node is recorded, so reading
/// a value never re-runs the graph and identical inputs produce bitwise
/// identical outputs.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// Value of a length-1 node.
    pub fn scalar(&self, id: NodeId) -> Result<f64> {
        self.nodes[id.0].value.item()
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    fn check_id(&self, id: NodeId, context: &str) -> Result<()> {
        if id.0 >= self.nodes.len() {
            return Err(PareError::numeric(format!(
                "{context}: node id {} out of range",
                id.0
            )));
        }
        Ok(())
    }

    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Input)
    }

    pub fn scalar_input(&mut self, value: f64) -> NodeId {
        self.push(Tensor::scalar(value), Op::Input)
    }

    /// Bind a named parameter as a leaf node. Its gradient is accumulated
    /// into the store by [`Tape::backward`].
    pub fn param(&mut self, store: &ParamStore, name: &str) -> Result<NodeId> {
        let value = store.value(name)?.clone();
        Ok(self.push(value, Op::Param(name.to_string())))
    }

    /// `act(x · W + b)`: `x [n]`, `w [n, m]`, `b [m]` -> `[m]`.
    pub fn affine(&mut self, x: NodeId, w: NodeId, b: NodeId, act: Activation) -> Result<NodeId> {
        self.check_id(x, "affine")?;
        self.check_id(w, "affine")?;
        self.check_id(b, "affine")?;
        let (rows, cols) = self.nodes[w.0].value.dims2().map_err(|_| {
            PareError::numeric(format!(
                "affine: weight must be a matrix, found shape {}",
                self.nodes[w.0].value.shape_string()
            ))
        })?;
        let xv = &self.nodes[x.0].value;
        let bv = &self.nodes[b.0].value;
        if xv.len() != rows || bv.len() != cols {
            return Err(PareError::numeric(format!(
                "affine shape mismatch: x {} vs w {} vs b {}",
                xv.shape_string(),
                self.nodes[w.0].value.shape_string(),
                bv.shape_string()
            )));
        }
        let wv = self.nodes[w.0].value.data();
        let mut out = vec![0.0; cols];
        for j in 0..cols {
            let mut acc = bv.data()[j];
            for i in 0..rows {
                acc += xv.data()[i] * wv[i * cols + j];
            }
            out[j] = act.apply(acc);
        }
        Ok(self.push(Tensor::vector(out), Op::Affine { x, w, b, act }))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(PareError::numeric("concat of zero parts"));
        }
        let mut out = Vec::new();
        for &p in parts {
            self.check_id(p, "concat")?;
            let v = &self.nodes[p.0].value;
            if v.shape().len() != 1 {
                return Err(PareError::numeric(format!(
                    "concat expects vectors, found shape {}",
                    v.shape_string()
                )));
            }
            out.extend_from_slice(v.data());
        }
        Ok(self.push(
            Tensor::vector(out),
            Op::Concat {
                parts: parts.to_vec(),
            },
        ))
    }

    /// Elementwise sum of same-shaped nodes.
    pub fn sum(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(PareError::numeric("sum of zero parts"));
        }
        for &p in parts {
            self.check_id(p, "sum")?;
        }
        let shape = self.nodes[parts[0].0].value.shape().to_vec();
        let mut out = Tensor::zeros(&shape);
        for &p in parts {
            let v = &self.nodes[p.0].value;
            if v.shape() != shape.as_slice() {
                return Err(PareError::numeric(format!(
                    "sum shape mismatch: {} vs {}",
                    v.shape_string(),
                    out.shape_string()
                )));
            }
            for (o, x) in out.data_mut().iter_mut().zip(v.data()) {
                *o += x;
            }
        }
        Ok(self.push(
            out,
            Op::Sum {
                parts: parts.to_vec(),
            },
        ))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.sum(&[a, b])
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.check_id(a, "sub")?;
        self.check_id(b, "sub")?;
        let av = &self.nodes[a.0].value;
        let bv = &self.nodes[b.0].value;
        if av.shape() != bv.shape() {
            return Err(PareError::numeric(format!(
                "sub shape mismatch: {} vs {}",
                av.shape_string(),
                bv.shape_string()
            )));
        }
        let out: Vec<f64> = av.data().iter().zip(bv.data()).map(|(x, y)| x - y).collect();
        let shape = av.shape().to_vec();
        Ok(self.push(Tensor::from_vec(&shape, out)?, Op::Sub { a, b }))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.check_id(a, "mul")?;
        self.check_id(b, "mul")?;
        let av = &self.nodes[a.0].value;
        let bv = &self.nodes[b.0].value;
        if av.shape() != bv.shape() {
            return Err(PareError::numeric(format!(
                "mul shape mismatch: {} vs {}",
                av.shape_string(),
                bv.shape_string()
            )));
        }
        let out: Vec<f64> = av.data().iter().zip(bv.data()).map(|(x, y)| x * y).collect();
        let shape = av.shape().to_vec();
        Ok(self.push(Tensor::from_vec(&shape, out)?, Op::Mul { a, b }))
    }

    pub fn unary(&mut self, x: NodeId, act: Activation) -> Result<NodeId> {
        self.check_id(x, "unary")?;
        let xv = &self.nodes[x.0].value;
        let out: Vec<f64> = xv.data().iter().map(|&v| act.apply(v)).collect();
        let shape = xv.shape().to_vec();
        Ok(self.push(Tensor::from_vec(&shape, out)?, Op::Unary { x, act }))
    }

    /// Sum of the selected rows of a `[q, d]` table. An empty selection
    /// yields the zero vector; gradient flows only to the selected rows.
    pub fn embed_sum(&mut self, table: NodeId, rows: &[usize]) -> Result<NodeId> {
        self.check_id(table, "embed")?;
        let (q, d) = self.nodes[table.0].value.dims2().map_err(|_| {
            PareError::numeric(format!(
                "embed: table must be a matrix, found shape {}",
                self.nodes[table.0].value.shape_string()
            ))
        })?;
        let tv = self.nodes[table.0].value.data();
        let mut out = vec![0.0; d];
        for &r in rows {
            if r >= q {
                return Err(PareError::numeric(format!(
                    "embed: row index {r} out of range for table {}",
                    self.nodes[table.0].value.shape_string()
                )));
            }
            for j in 0..d {
                out[j] += tv[r * d + j];
            }
        }
        Ok(self.push(
            Tensor::vector(out),
            Op::EmbedSum {
                table,
                rows: rows.to_vec(),
            },
        ))
    }

    pub fn gather(&mut self, x: NodeId, indices: &[usize]) -> Result<NodeId> {
        self.check_id(x, "gather")?;
        let xv = &self.nodes[x.0].value;
        let mut out = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= xv.len() {
                return Err(PareError::numeric(format!(
                    "gather: index {i} out of range for shape {}",
                    xv.shape_string()
                )));
            }
            out.push(xv.data()[i]);
        }
        Ok(self.push(
            Tensor::vector(out),
            Op::Gather {
                x,
                indices: indices.to_vec(),
            },
        ))
    }

    pub fn softmax(&mut self, x: NodeId) -> Result<NodeId> {
        self.check_id(x, "softmax")?;
        let xv = &self.nodes[x.0].value;
        if xv.is_empty() {
            return Err(PareError::numeric("softmax of an empty vector"));
        }
        let max = xv.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = xv.data().iter().map(|v| (v - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let out: Vec<f64> = exps.iter().map(|e| e / total).collect();
        Ok(self.push(Tensor::vector(out), Op::Softmax { x }))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.check_id(a, "dot")?;
        self.check_id(b, "dot")?;
        let av = &self.nodes[a.0].value;
        let bv = &self.nodes[b.0].value;
        if av.shape() != bv.shape() || av.shape().len() != 1 {
            return Err(PareError::numeric(format!(
                "dot shape mismatch: {} vs {}",
                av.shape_string(),
                bv.shape_string()
            )));
        }
        let out: f64 = av.data().iter().zip(bv.data()).map(|(x, y)| x * y).sum();
        Ok(self.push(Tensor::scalar(out), Op::Dot { a, b }))
    }

    pub fn scale(&mut self, x: NodeId, factor: f64) -> Result<NodeId> {
        self.check_id(x, "scale")?;
        let xv = &self.nodes[x.0].value;
        let out: Vec<f64> = xv.data().iter().map(|v| v * factor).collect();
        let shape = xv.shape().to_vec();
        Ok(self.push(Tensor::from_vec(&shape, out)?, Op::Scale { x, factor }))
    }

    /// `(target - pred)^2` with gradient `-2 (target - pred)` w.r.t. `pred`.
    pub fn squared_error(&mut self, pred: NodeId, target: f64) -> Result<NodeId> {
        self.check_id(pred, "squared_error")?;
        if !target.is_finite() {
            return Err(PareError::numeric("squared_error: non-finite target"));
        }
        let p = self.nodes[pred.0].value.item()?;
        let diff = target - p;
        Ok(self.push(
            Tensor::scalar(diff * diff),
            Op::SquaredError { pred, target },
        ))
    }

    /// Reverse pass from a scalar `loss` node, accumulating parameter
    /// gradients into `store`. Gradients add onto whatever the store
    /// already holds, so batches can span multiple tapes.
    pub fn backward(&self, loss: NodeId, store: &mut ParamStore) -> Result<()> {
        self.check_id(loss, "backward")?;
        if self.nodes[loss.0].value.len() != 1 {
            return Err(PareError::numeric(format!(
                "backward expects a scalar loss, found shape {}",
                self.nodes[loss.0].value.shape_string()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = Vec::with_capacity(loss.0 + 1);
        grads.resize_with(loss.0 + 1, || None);
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for i in (0..=loss.0).rev() {
            // Inputs of node i always have smaller ids, so split the grad
            // buffer to read g while writing into upstream slots.
            let (upstream, rest) = grads.split_at_mut(i);
            let g = match rest[0].take() {
                Some(g) => g,
                None => continue,
            };
            let node = &self.nodes[i];
            match &node.op {
                Op::Input => {}
                Op::Param(name) => {
                    store.add_grad(name, &g)?;
                }
                Op::Affine { x, w, b, act } => {
                    let cols = node.value.len();
                    let xv = self.nodes[x.0].value.data();
                    let wv = self.nodes[w.0].value.data();
                    let rows = xv.len();
                    // Gradient through the activation, using the stored output.
                    let da: Vec<f64> = (0..cols)
                        .map(|j| g.data()[j] * act.grad_from_output(node.value.data()[j]))
                        .collect();
                    {
                        let gx = ensure(&mut upstream[x.0], &[rows]);
                        for i2 in 0..rows {
                            let mut acc = 0.0;
                            for j in 0..cols {
                                acc += wv[i2 * cols + j] * da[j];
                            }
                            gx.data_mut()[i2] += acc;
                        }
                    }
                    {
                        let gw = ensure(&mut upstream[w.0], &[rows, cols]);
                        for i2 in 0..rows {
                            for j in 0..cols {
                                gw.data_mut()[i2 * cols + j] += xv[i2] * da[j];
                            }
                        }
                    }
                    {
                        let gb = ensure(&mut upstream[b.0], &[cols]);
                        for j in 0..cols {
                            gb.data_mut()[j] += da[j];
                        }
                    }
                }
                Op::Concat { parts } => {
                    let mut offset = 0;
                    for &p in parts {
                        let len = self.nodes[p.0].value.len();
                        let shape = self.nodes[p.0].value.shape().to_vec();
                        let gp = ensure(&mut upstream[p.0], &shape);
                        for k in 0..len {
                            gp.data_mut()[k] += g.data()[offset + k];
                        }
                        offset += len;
                    }
                }
                Op::Sum { parts } => {
                    for &p in parts {
                        let shape = self.nodes[p.0].value.shape().to_vec();
                        let gp = ensure(&mut upstream[p.0], &shape);
                        gp.add_assign(&g)?;
                    }
                }
                Op::Sub { a, b } => {
                    let shape = node.value.shape().to_vec();
                    {
                        let ga = ensure(&mut upstream[a.0], &shape);
                        ga.add_assign(&g)?;
                    }
                    let gb = ensure(&mut upstream[b.0], &shape);
                    for (o, x) in gb.data_mut().iter_mut().zip(g.data()) {
                        *o -= x;
                    }
                }
                Op::Mul { a, b } => {
                    let shape = node.value.shape().to_vec();
                    let av: Vec<f64> = self.nodes[a.0].value.data().to_vec();
                    let bv: Vec<f64> = self.nodes[b.0].value.data().to_vec();
                    {
                        let ga = ensure(&mut upstream[a.0], &shape);
                        for (k, o) in ga.data_mut().iter_mut().enumerate() {
                            *o += g.data()[k] * bv[k];
                        }
                    }
                    let gb = ensure(&mut upstream[b.0], &shape);
                    for (k, o) in gb.data_mut().iter_mut().enumerate() {
                        *o += g.data()[k] * av[k];
                    }
                }
                Op::Unary { x, act } => {
                    let shape = node.value.shape().to_vec();
                    let gx = ensure(&mut upstream[x.0], &shape);
                    for (k, o) in gx.data_mut().iter_mut().enumerate() {
                        *o += g.data()[k] * act.grad_from_output(node.value.data()[k]);
                    }
                }
                Op::EmbedSum { table, rows } => {
                    let shape = self.nodes[table.0].value.shape().to_vec();
                    let d = node.value.len();
                    let gt = ensure(&mut upstream[table.0], &shape);
                    for &r in rows {
                        for j in 0..d {
                            gt.data_mut()[r * d + j] += g.data()[j];
                        }
                    }
                }
                Op::Gather { x, indices } => {
                    let shape = self.nodes[x.0].value.shape().to_vec();
                    let gx = ensure(&mut upstream[x.0], &shape);
                    for (k, &idx) in indices.iter().enumerate() {
                        gx.data_mut()[idx] += g.data()[k];
                    }
                }
                Op::Softmax { x } => {
                    let y = node.value.data();
                    let weighted: f64 = g.data().iter().zip(y).map(|(gi, yi)| gi * yi).sum();
                    let shape = self.nodes[x.0].value.shape().to_vec();
                    let gx = ensure(&mut upstream[x.0], &shape);
                    for (k, o) in gx.data_mut().iter_mut().enumerate() {
                        *o += y[k] * (g.data()[k] - weighted);
                    }
                }
                Op::Dot { a, b } => {
                    let gs = g.data()[0];
                    let av: Vec<f64> = self.nodes[a.0].value.data().to_vec();
                    let bv: Vec<f64> = self.nodes[b.0].value.data().to_vec();
                    {
                        let shape = self.nodes[a.0].value.shape().to_vec();
                        let ga = ensure(&mut upstream[a.0], &shape);
                        for (k, o) in ga.data_mut().iter_mut().enumerate() {
                            *o += gs * bv[k];
                        }
                    }
                    let shape = self.nodes[b.0].value.shape().to_vec();
                    let gb = ensure(&mut upstream[b.0], &shape);
                    for (k, o) in gb.data_mut().iter_mut().enumerate() {
                        *o += gs * av[k];
                    }
                }
                Op::Scale { x, factor } => {
                    let shape = self.nodes[x.0].value.shape().to_vec();
                    let gx = ensure(&mut upstream[x.0], &shape);
                    for (k, o) in gx.data_mut().iter_mut().enumerate() {
                        *o += g.data()[k] * factor;
                    }
                }
                Op::SquaredError { pred, target } => {
                    let p = self.nodes[pred.0].value.data()[0];
                    let gp = ensure(&mut upstream[pred.0], &[1]);
                    gp.data_mut()[0] += g.data()[0] * (-2.0) * (target - p);
                }
            }
        }
        Ok(())
    }
}

fn ensure<'a>(slot: &'a mut Option<Tensor>, shape: &[usize]) -> &'a mut Tensor {
    if slot.is_none() {
        *slot = Some(Tensor::zeros(shape));
    }
    slot.as_mut().unwrap()
}

/// Node ids of the four LSTM gate weight matrices and biases, each weight
/// shaped `[1 + hidden, hidden]` acting on the concatenation `[p_t, H_{t-1}]`.
pub struct LstmParamIds {
    pub w_input: NodeId,
    pub b_input: NodeId,
    pub w_forget: NodeId,
    pub b_forget: NodeId,
    pub w_cell: NodeId,
    pub b_cell: NodeId,
    pub w_output: NodeId,
    pub b_output: NodeId,
}

/// Run an LSTM over a sequence of scalar inputs and return the final hidden
/// state node. `H_0 = C_0 = 0`; an empty sequence returns the zero state.
///
/// Per step, with `z = [p_t, H_{t-1}]`:
/// input gate `I = sigmoid(z W_I + b_I)`, forget gate `F = sigmoid(z W_F + b_F)`,
/// candidate `G = tanh(z W_G + b_G)`, output gate `O = sigmoid(z W_O + b_O)`,
/// `C_t = F * C_{t-1} + I * G`, `H_t = O * tanh(C_t)`.
pub fn lstm_sequence(
    tape: &mut Tape,
    inputs: &[f64],
    hidden: usize,
    params: &LstmParamIds,
) -> Result<NodeId> {
    if hidden == 0 {
        return Err(PareError::numeric("lstm: hidden size must be at least 1"));
    }
    if let Some(bad) = inputs.iter().find(|v| !v.is_finite()) {
        return Err(PareError::numeric(format!("lstm: non-finite input {bad}")));
    }
    let mut h = tape.input(Tensor::zeros(&[hidden]));
    let mut c = tape.input(Tensor::zeros(&[hidden]));
    for &p in inputs {
        let x = tape.scalar_input(p);
        let z = tape.concat(&[x, h])?;
        let i = tape.affine(z, params.w_input, params.b_input, Activation::Sigmoid)?;
        let f = tape.affine(z, params.w_forget, params.b_forget, Activation::Sigmoid)?;
        let g = tape.affine(z, params.w_cell, params.b_cell, Activation::Tanh)?;
        let o = tape.affine(z, params.w_output, params.b_output, Activation::Sigmoid)?;
        let fc = tape.mul(f, c)?;
        let ig = tape.mul(i, g)?;
        c = tape.add(fc, ig)?;
        let ct = tape.unary(c, Activation::Tanh)?;
        h = tape.mul(o, ct)?;
    }
    Ok(h)
}
