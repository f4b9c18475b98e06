"""Build interactions and readouts from scenarios and run analyses.

Results are returned as JSON-ready dictionaries plus pair-matrix rows;
writing them to disk is left to the command-line layer.
"""

import copy
from dataclasses import dataclass, field

import numpy as np

from . import analysis, interaction, oracle, readout_opt
from .core import DEFAULT_TOL, ToleranceConfig, pure_density, trace_distance, validate_density
from .errors import DimensionError
from .scenario import Scenario


def complex_json(a):
    """Complex array to nested lists of ``[re, im]`` pairs."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def real_json(a):
    """Real array to nested lists with NaN as None."""
    a = np.asarray(a, dtype=float)
    return [[None if np.isnan(x) else float(x) for x in row] for row in a]


def build_interaction(spec):
    if spec.type == "conditional-unitaries":
        return interaction.from_conditional_unitaries(spec.unitaries, spec.initial_meter,
                                                      spec.labels)
    if spec.type == "product-hamiltonian":
        return interaction.from_product_hamiltonian(interaction.ProductHamiltonianSpec(
            spec.a_values, spec.b_values, np.array(spec.initial_meter), spec.effective_time))
    if spec.type == "two-part-meter":
        return interaction.from_two_part_meter(interaction.TwoPartMeterSpec(
            spec.a_values, spec.v_values, np.array(spec.dist), spec.effective_time))
    return interaction.from_states(spec.states, spec.labels)


@dataclass
class BuiltReadout:
    strategy: analysis.ReadoutStrategy
    factorization: readout_opt.NonnegFactorization = None


def build_readout(name, spec, mi, seed=0, tol=DEFAULT_TOL):
    if spec.type == "computational":
        return BuiltReadout(analysis.computational_readout(mi.dim, name))
    if spec.type == "basis-matrix":
        return BuiltReadout(analysis.basis_readout(spec.basis, name, tol.validity))
    if spec.type == "eraser":
        return BuiltReadout(readout_opt.eraser_readout(mi, tol.validity, name=name))
    if spec.type == "haar-random":
        s = seed if spec.seed is None else spec.seed
        return BuiltReadout(oracle.haar_readout(s, mi.dim, name))
    fact = readout_opt.cp_factorize(interaction.gram(mi), spec.max_outcomes, spec.restarts,
                                    tol.optimization, seed if spec.seed is None else spec.seed,
                                    spec.method)
    return BuiltReadout(readout_opt.optimal_readout(mi, fact, name=name), fact)


def input_density(spec, labels):
    if spec is None:
        return None
    if spec.state is not None:
        return pure_density(np.array(spec.state), labels=labels)
    return validate_density(np.array(spec.density), labels=labels)


@dataclass
class Prepared:
    scenario: Scenario
    mi: interaction.MeasurementInteraction
    readouts: dict
    rho_in: object
    tol: ToleranceConfig
    probs: dict = field(default_factory=dict)

    def cond_probs(self, name):
        if name not in self.probs:
            self.probs[name] = analysis.cond_probs(self.mi, self.readouts[name].strategy,
                                                   self.tol)
        return self.probs[name]


def prepare(scenario, seed=0, tol=DEFAULT_TOL, readout_names=None):
    mi = build_interaction(scenario.interaction)
    names = scenario.readouts if readout_names is None else readout_names
    readouts = {name: build_readout(name, scenario.readouts[name], mi, seed, tol)
                for name in names}
    rho = input_density(scenario.input, mi.labels)
    if rho is not None and rho.dim != mi.n:
        raise DimensionError("input state dimension does not match number of eigenstates",
                             state_dim=rho.dim, eigenstates=mi.n)
    return Prepared(scenario, mi, readouts, rho, tol)


def _pair_rows(analysis_name, readout_name, pm):
    labels = pm.labels
    return [(analysis_name, readout_name, labels[i], labels[j], v) for i, j, v in pm.pairs()]


def _pair_payload(pm):
    return {"kind": pm.kind.value, "labels": list(pm.labels), "values": real_json(pm.values)}


def run_scenario(scenario, seed=0, tol=DEFAULT_TOL):
    """Run every requested analysis.

    Returns
    -------
    files : dict
        Output file name (without extension) to JSON payload.
    rows : list of tuple
        ``(analysis, readout, a1_label, a2_label, value)`` for the pair CSV.
    """
    wanted = list(dict.fromkeys(scenario.analyses))
    files, rows = {}, []
    if not wanted:
        return files, rows
    prep = prepare(scenario, seed, tol)
    mi = prep.mi
    g = interaction.gram(mi)
    labels = list(mi.labels)

    facts = {k: v.factorization.to_dict() for k, v in prep.readouts.items()
             if v.factorization is not None}
    if facts:
        files["factorizations"] = facts

    if "gram" in wanted:
        files["gram"] = {"labels": labels, "gram": complex_json(g.g),
                         "degenerate": mi.degenerate}
    if "decoherence" in wanted:
        d = analysis.decoherence(g)
        files["decoherence"] = _pair_payload(d)
        rows += _pair_rows("decoherence", "", d)
    if "resolution" in wanted:
        payload = {}
        for name in prep.readouts:
            p = prep.cond_probs(name)
            r = analysis.resolution(p, name)
            payload[name] = {**_pair_payload(r), "condProbs": p.p.tolist(),
                             "outcomes": list(p.outcome_labels)}
            rows += _pair_rows("resolution", name, r)
        files["resolution"] = {"labels": labels, "readouts": payload}
    outputs = {}
    if prep.rho_in is not None:
        for name, b in prep.readouts.items():
            outputs[name] = analysis.conditional_outputs(mi, b.strategy, prep.rho_in, tol)
    if "irreversible" in wanted:
        payload = {}
        for name in prep.readouts:
            d = analysis.irreversible_decoherence(prep.cond_probs(name), name, tol)
            entry = _pair_payload(d)
            rows += _pair_rows("irreversible", name, d)
            if name in outputs:
                ds = analysis.irreversible_decoherence_from_states(outputs[name], prep.rho_in,
                                                                   name, tol)
                entry["fromStates"] = real_json(ds.values)
                rows += _pair_rows("irreversible-states", name, ds)
            payload[name] = entry
        files["irreversible"] = {"labels": labels, "readouts": payload}
    if "conditional-states" in wanted:
        payload = {}
        for name, outs in outputs.items():
            analysis.check_positivity(outs, tol)
            payload[name] = [{"outcome": o.outcome, "prob": o.prob,
                              "rho": None if o.rho is None else complex_json(o.rho.matrix)}
                             for o in outs]
        out_rho = analysis.output_density(mi, prep.rho_in, tol)
        files["conditional_states"] = {"labels": labels, "input": complex_json(prep.rho_in.matrix),
                                       "output": complex_json(out_rho.matrix),
                                       "readouts": payload}
    if "steering" in wanted:
        st = scenario.steering
        pairs = st.pairs or [(i, j) for i in range(mi.n) for j in range(i + 1, mi.n)]
        reports = []
        for pair in pairs:
            rep = analysis.steering_report(mi, prep.readouts[st.r].strategy,
                                           prep.readouts[st.c].strategy, pair, st.margin, tol)
            reports.append({"pair": list(rep.pair), "labels": [labels[pair[0]], labels[pair[1]]],
                            "readoutR": rep.readout_r, "readoutC": rep.readout_c,
                            "resolutionR": rep.resolution_r,
                            "irreversibleC": rep.irreversible_c,
                            "violation": rep.violation, "margin": rep.margin})
        files["steering"] = {"reports": reports,
                             "anyViolation": any(r["violation"] for r in reports)}
    if "feedback" in wanted:
        name = scenario.feedback.readout
        r = prep.readouts[name].strategy
        fb = readout_opt.feedback_correction(mi, r, tol.validity)
        entry = {"readout": name, "phases": fb.phases.tolist()}
        if prep.rho_in is not None:
            restored = readout_opt.corrected_channel(mi, r, fb, prep.rho_in)
            entry["traceDistance"] = trace_distance(restored.matrix, prep.rho_in.matrix)
        files["feedback"] = entry
    return files, rows


def set_path(raw, path, value):
    """Set ``value`` at a dotted path (list indices allowed) in a copy of ``raw``."""
    out = copy.deepcopy(raw)
    keys = path.split(".")
    node = out
    for k in keys[:-1]:
        node = node[int(k)] if isinstance(node, list) else node[k]
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        if last not in node:
            raise KeyError(path)
        node[last] = value
    return out


def sweep_point(raw, sweep, value, seed=0, tol=DEFAULT_TOL):
    """Evaluate the requested scalars at one parameter value."""
    scenario = Scenario.model_validate(set_path(raw, sweep.parameter, value))
    needed = [o.readout for o in sweep.outputs if o.readout is not None]
    prep = prepare(scenario, seed, tol, readout_names=list(dict.fromkeys(needed)))
    row = [value]
    dmat = None
    for o in sweep.outputs:
        i, j = o.pair
        if o.quantity == "D":
            if dmat is None:
                dmat = analysis.decoherence(interaction.gram(prep.mi)).values
            row.append(float(dmat[i, j]))
        elif o.quantity == "R":
            row.append(float(analysis.resolution(prep.cond_probs(o.readout)).values[i, j]))
        else:
            row.append(float(analysis.irreversible_decoherence(
                prep.cond_probs(o.readout), tol=tol).values[i, j]))
    return row
