use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::methods::MeasurementMethod;
use crate::units::{BitRate, Duration};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowId(String);

impl FlowId {
    pub fn new(id: impl Into<String>) -> Self {
        FlowId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodId(String);

impl MethodId {
    pub fn new(id: impl Into<String>) -> Self {
        MethodId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A constant-bit-rate flow. `packet_bits` is header inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    id: FlowId,
    user_rate: BitRate,
    packet_bits: u64,
}

impl FlowSpec {
    pub fn new(id: impl Into<String>, user_rate: BitRate, packet_bits: u64) -> Result<Self> {
        let id = FlowId::new(id);
        if user_rate.is_zero() {
            return Err(Error::ZeroRate(id.0));
        }
        if packet_bits == 0 {
            return Err(Error::ZeroPacketSize(id.0));
        }
        Ok(FlowSpec {
            id,
            user_rate,
            packet_bits,
        })
    }

    pub fn id(&self) -> &FlowId {
        &self.id
    }

    pub fn user_rate(&self) -> BitRate {
        self.user_rate
    }

    pub fn packet_bits(&self) -> u64 {
        self.packet_bits
    }

    /// Spacing between consecutive packets, `L / R`.
    pub fn emission_interval(&self) -> Duration {
        Duration::from_secs(self.packet_bits as f64 / self.user_rate.bps()).expect("positive size over positive rate")
    }

    pub fn with_id(&self, id: impl Into<String>) -> Self {
        FlowSpec {
            id: FlowId::new(id),
            ..self.clone()
        }
    }
}

/// A single capacity-limited channel. When `overprovisioned` is set the
/// capacity is kept for reporting only and every packet is admitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    capacity: BitRate,
    overprovisioned: bool,
}

impl LinkSpec {
    pub fn new(capacity: BitRate, overprovisioned: bool) -> Result<Self> {
        if capacity.is_zero() {
            return Err(Error::ZeroCapacity);
        }
        Ok(LinkSpec {
            capacity,
            overprovisioned,
        })
    }

    pub fn saturable(capacity: BitRate) -> Result<Self> {
        Self::new(capacity, false)
    }

    pub fn overprovisioned(capacity: BitRate) -> Result<Self> {
        Self::new(capacity, true)
    }

    pub fn capacity(&self) -> BitRate {
        self.capacity
    }

    pub fn is_overprovisioned(&self) -> bool {
        self.overprovisioned
    }
}

/// A measurement method instance attached to the flow it monitors.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodBinding {
    pub id: MethodId,
    pub method: MeasurementMethod,
    pub flow: FlowId,
}

impl MethodBinding {
    pub fn new(id: impl Into<String>, method: MeasurementMethod, flow: impl Into<String>) -> Self {
        MethodBinding {
            id: MethodId::new(id),
            method,
            flow: FlowId::new(flow),
        }
    }
}

/// Validated set of flows, link and measurement methods.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    flows: Vec<FlowSpec>,
    link: LinkSpec,
    methods: Vec<MethodBinding>,
    flow_index: BTreeMap<FlowId, usize>,
    /// Method indices bound to each flow, by flow index.
    by_flow: Vec<Vec<usize>>,
}

impl Scenario {
    pub fn flows(&self) -> &[FlowSpec] {
        &self.flows
    }

    pub fn link(&self) -> &LinkSpec {
        &self.link
    }

    pub fn methods(&self) -> &[MethodBinding] {
        &self.methods
    }

    pub fn flow(&self, id: &FlowId) -> Option<&FlowSpec> {
        self.flow_index.get(id).map(|i| &self.flows[*i])
    }

    /// Methods bound to the flow at `flow_index`, with their indices.
    pub fn methods_on(&self, flow_index: usize) -> impl Iterator<Item = (usize, &MethodBinding)> {
        self.by_flow[flow_index].iter().map(|i| (*i, &self.methods[*i]))
    }

    pub fn method(&self, id: &MethodId) -> Option<&MethodBinding> {
        self.methods.iter().find(|m| &m.id == id)
    }

    /// Flow monitored by `binding`. Bindings are checked at validation time.
    pub fn flow_of(&self, binding: &MethodBinding) -> &FlowSpec {
        self.flow(&binding.flow)
            .expect("validated scenario binds methods to existing flows")
    }

    /// The same traffic with every measurement method removed.
    pub fn unobserved(&self) -> Scenario {
        Scenario {
            flows: self.flows.clone(),
            link: self.link,
            methods: Vec::new(),
            flow_index: self.flow_index.clone(),
            by_flow: vec![Vec::new(); self.flows.len()],
        }
    }

    pub fn with_link(&self, link: LinkSpec) -> Scenario {
        Scenario { link, ..self.clone() }
    }

    /// Largest packet any source can put on the wire, in-band overhead included.
    pub fn max_packet_bits(&self) -> u64 {
        let data = self.flows.iter().enumerate().map(|(i, f)| {
            let inband: u64 = self
                .methods_on(i)
                .filter_map(|(_, m)| m.method.in_band_params())
                .map(|t| t.message().bits())
                .sum();
            f.packet_bits + inband
        });
        let standalone = self
            .methods
            .iter()
            .filter(|m| m.method.in_band_params().is_none())
            .map(|m| m.method.message_bits().bits());
        data.chain(standalone).max().unwrap_or(0)
    }
}

/// Checks every component and cross reference, returning a [`Scenario`].
///
/// `methods` may be empty (an unobserved scenario); `flows` may not.
pub fn validate_scenario(flows: Vec<FlowSpec>, link: LinkSpec, methods: Vec<MethodBinding>) -> Result<Scenario> {
    if flows.is_empty() {
        return Err(Error::NoFlows);
    }
    if link.capacity.is_zero() {
        return Err(Error::ZeroCapacity);
    }
    let mut flow_index = BTreeMap::new();
    for (i, f) in flows.iter().enumerate() {
        if f.user_rate.is_zero() {
            return Err(Error::ZeroRate(f.id.0.clone()));
        }
        if f.packet_bits == 0 {
            return Err(Error::ZeroPacketSize(f.id.0.clone()));
        }
        if flow_index.insert(f.id.clone(), i).is_some() {
            return Err(Error::DuplicateFlowId(f.id.0.clone()));
        }
    }
    let mut by_flow = vec![Vec::new(); flows.len()];
    let mut seen_methods = BTreeSet::new();
    for (mi, m) in methods.iter().enumerate() {
        let Some(fi) = flow_index.get(&m.flow) else {
            return Err(Error::UnknownFlow {
                method: m.id.0.clone(),
                flow: m.flow.0.clone(),
            });
        };
        if !seen_methods.insert(&m.id) {
            return Err(Error::DuplicateMethodId(m.id.0.clone()));
        }
        by_flow[*fi].push(mi);
    }
    Ok(Scenario {
        flows,
        link,
        methods,
        flow_index,
        by_flow,
    })
}

impl Scenario {
    /// Re-validates this scenario from its parts.
    pub fn revalidate(&self) -> Result<Scenario> {
        validate_scenario(self.flows.clone(), self.link, self.methods.clone())
    }
}
