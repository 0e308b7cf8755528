"""Gate-level netlist format: parsing, validation, emission, benchmark generators.

The format is a BLIF-like line grammar::

    .model NAME
    .inputs a b c
    .outputs y
    .gate KIND PIN=net PIN=net ...
    .end

`#` starts a comment; whitespace within a line is insignificant. Gate kinds
come from the cell library. Every net has exactly one driver; combinational
cycles are rejected (SRAM6T instances are the only permitted cycle breakers).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .cells import get_template
from .errors import (CombinationalCycle, DuplicateDriver, NetlistSyntaxError,
                     UndrivenNet, UnknownCell)


@dataclass
class Gate:
    instance: str
    kind: str
    pins: Dict[str, str]   # pin name -> net name

    def output_net(self) -> str:
        return self.pins[get_template(self.kind).output]

    def input_nets(self) -> List[str]:
        t = get_template(self.kind)
        return [self.pins[p] for p in t.inputs]


@dataclass
class Netlist:
    name: str
    inputs: List[str]
    outputs: List[str]
    gates: List[Gate]

    @property
    def nets(self) -> set:
        out = set(self.inputs) | set(self.outputs)
        for g in self.gates:
            out.update(g.pins.values())
        return out

    def driver_of(self) -> Dict[str, Gate]:
        return {g.output_net(): g for g in self.gates}

    def gate_by_id(self) -> Dict[str, Gate]:
        return {g.instance: g for g in self.gates}


def parse_netlist(text: str) -> Netlist:
    """Parse and validate; raises the first structural error found."""
    name = None
    inputs: List[str] = []
    outputs: List[str] = []
    gates: List[Gate] = []
    seen_ids = set()
    ended = False
    end_line = None

    auto_id = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise NetlistSyntaxError(lineno, "content after .end")
        tokens = line.split()
        directive = tokens[0]
        if directive == ".model":
            if len(tokens) != 2:
                raise NetlistSyntaxError(lineno, ".model takes one name")
            if name is not None:
                raise NetlistSyntaxError(lineno, "duplicate .model")
            name = tokens[1]
        elif directive == ".inputs":
            inputs.extend(tokens[1:])
        elif directive == ".outputs":
            outputs.extend(tokens[1:])
        elif directive == ".gate":
            if len(tokens) < 2:
                raise NetlistSyntaxError(lineno, ".gate needs a cell kind")
            kind = tokens[1]
            template = get_template(kind)  # UnknownCell on bad kinds
            pins = {}
            instance = None
            for tok in tokens[2:]:
                if "=" not in tok:
                    raise NetlistSyntaxError(lineno, f"expected PIN=net, got {tok!r}")
                pin, _, net = tok.partition("=")
                if pin == "id":
                    instance = net
                    continue
                if pin not in template.pins or template.pins[pin].attach == "rail":
                    raise NetlistSyntaxError(lineno, f"{kind} has no signal pin {pin!r}")
                if not net:
                    raise NetlistSyntaxError(lineno, f"empty net for pin {pin!r}")
                if pin in pins:
                    raise NetlistSyntaxError(lineno, f"pin {pin!r} bound twice")
                pins[pin] = net
            required = set(template.inputs) | {template.output}
            missing = required - set(pins)
            if missing:
                raise NetlistSyntaxError(
                    lineno, f"{kind} missing pins {sorted(missing)}")
            if instance is None:
                instance = f"g{auto_id}"
                auto_id += 1
            if instance in seen_ids:
                raise NetlistSyntaxError(lineno, f"duplicate instance id {instance!r}")
            seen_ids.add(instance)
            gates.append(Gate(instance, kind, pins))
        elif directive == ".end":
            ended = True
            end_line = lineno
        else:
            raise NetlistSyntaxError(lineno, f"unknown directive {directive!r}")

    if name is None:
        raise NetlistSyntaxError(1, "missing .model")
    if not ended:
        raise NetlistSyntaxError(len(text.splitlines()) or 1, "missing .end")

    netlist = Netlist(name=name, inputs=inputs, outputs=outputs, gates=gates)
    validate_netlist(netlist)
    return netlist


def validate_netlist(netlist: Netlist) -> None:
    """Structural checks: single driver, all nets driven, no combinational cycles."""
    drivers: Dict[str, str] = {}
    for pi in netlist.inputs:
        if pi in drivers:
            raise DuplicateDriver(pi)
        drivers[pi] = "@input"
    for g in netlist.gates:
        out = g.output_net()
        if out in drivers:
            raise DuplicateDriver(out)
        drivers[out] = g.instance
    for g in netlist.gates:
        for net in g.input_nets():
            if net not in drivers:
                raise UndrivenNet(net)
    for po in netlist.outputs:
        if po not in drivers:
            raise UndrivenNet(po)

    # Cycle check over combinational gates; SRAM6T breaks paths.
    driver_gate = {g.output_net(): g for g in netlist.gates
                   if not get_template(g.kind).state_element}
    color: Dict[str, int] = {}   # instance -> 0 visiting, 1 done
    stack_path: List[str] = []

    def visit(g: Gate):
        state = color.get(g.instance)
        if state == 1:
            return
        if state == 0:
            idx = stack_path.index(g.instance)
            raise CombinationalCycle(stack_path[idx:] + [g.instance])
        color[g.instance] = 0
        stack_path.append(g.instance)
        for net in g.input_nets():
            pred = driver_gate.get(net)
            if pred is not None:
                visit(pred)
        stack_path.pop()
        color[g.instance] = 1

    import sys
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * len(netlist.gates) + 100))
    try:
        for g in netlist.gates:
            if not get_template(g.kind).state_element:
                visit(g)
    finally:
        sys.setrecursionlimit(old_limit)


def emit(netlist: Netlist) -> str:
    """Serialize; parse(emit(n)) is isomorphic to n."""
    lines = [f".model {netlist.name}"]
    if netlist.inputs:
        lines.append(".inputs " + " ".join(netlist.inputs))
    if netlist.outputs:
        lines.append(".outputs " + " ".join(netlist.outputs))
    for g in netlist.gates:
        t = get_template(g.kind)
        pin_order = list(t.inputs) + [t.output]
        pin_str = " ".join(f"{p}={g.pins[p]}" for p in pin_order)
        lines.append(f".gate {g.kind} {pin_str} id={g.instance}")
    lines.append(".end")
    return "\n".join(lines) + "\n"


class _Builder:
    """Helper for programmatic netlist construction with fresh names."""

    def __init__(self, name):
        self.netlist = Netlist(name=name, inputs=[], outputs=[], gates=[])
        self._counter = 0

    def fresh(self, hint="n"):
        self._counter += 1
        return f"{hint}_{self._counter}"

    def gate(self, kind, **pins):
        inst = f"u{len(self.netlist.gates)}"
        self.netlist.gates.append(Gate(inst, kind, dict(pins)))
        return pins[get_template(kind).output]

    def nand2(self, a, b):
        return self.gate("NAND2", A=a, B=b, Y=self.fresh("nd"))

    def inv(self, a):
        return self.gate("INV", A=a, Y=self.fresh("iv"))

    def and2(self, a, b):
        return self.inv(self.nand2(a, b))

    def xor2(self, a, b):
        x = self.nand2(a, b)
        return self.nand2(self.nand2(a, x), self.nand2(b, x))

    def half_adder(self, a, b):
        x = self.nand2(a, b)
        s = self.nand2(self.nand2(a, x), self.nand2(b, x))
        return s, self.inv(x)

    def full_adder(self, a, b, cin):
        # 9-gate NAND realization
        x1 = self.nand2(a, b)
        s1 = self.nand2(self.nand2(a, x1), self.nand2(b, x1))
        x4 = self.nand2(s1, cin)
        s = self.nand2(self.nand2(s1, x4), self.nand2(cin, x4))
        cout = self.nand2(x4, x1)
        return s, cout


def gen_multiplier(bits: int) -> Netlist:
    """Array multiplier over the inverting cell family.

    Partial products are AND rows (NAND2 + INV); rows are accumulated with a
    ripple-carry adder array built from the NAND-only half/full adders. The
    result computes a*b over 2*bits product bits.
    """
    if bits not in (4, 16):
        raise ValueError("supported widths: 4, 16")
    b = _Builder(f"mult{bits}")
    nl = b.netlist
    a_bits = [f"a{i}" for i in range(bits)]
    b_bits = [f"b{i}" for i in range(bits)]
    nl.inputs.extend(a_bits)
    nl.inputs.extend(b_bits)

    pp = [[b.and2(a_bits[i], b_bits[j]) for i in range(bits)]
          for j in range(bits)]

    # Accumulate row j shifted by j with a ripple-carry array.
    acc = list(pp[0])                      # weights 0..bits-1
    product = [acc.pop(0)]                 # p0 ready
    for j in range(1, bits):
        row = pp[j]
        nxt = []
        carry = None
        for k in range(bits):
            lhs = acc[k] if k < len(acc) else None
            terms = [t for t in (lhs, row[k], carry) if t is not None]
            if len(terms) == 1:
                s, carry = terms[0], None
            elif len(terms) == 2:
                s, carry = b.half_adder(terms[0], terms[1])
            else:
                s, carry = b.full_adder(terms[0], terms[1], terms[2])
            nxt.append(s)
        if carry is not None:
            nxt.append(carry)
        product.append(nxt.pop(0))
        acc = nxt
    product.extend(acc)

    for i, net in enumerate(product):
        po = f"p{i}"
        # alias through an inverter pair would waste gates; rename via outputs
        nl.outputs.append(po)
        _rename_net(nl, net, po)
    validate_netlist(nl)
    return nl


def _rename_net(nl: Netlist, old: str, new: str) -> None:
    for g in nl.gates:
        for pin, net in g.pins.items():
            if net == old:
                g.pins[pin] = new
    nl.inputs = [new if n == old else n for n in nl.inputs]


def gen_stacked_pair(kind: str) -> Netlist:
    """Two independent gates of one kind; the worst-case thermal benchmark."""
    t = get_template(kind)
    if t.state_element:
        raise UnknownCell(kind)
    nl = Netlist(name=f"stack_{kind.lower()}", inputs=[], outputs=[], gates=[])
    for g in range(2):
        pins = {}
        for i, pin in enumerate(t.inputs):
            net = f"in{g}_{i}"
            nl.inputs.append(net)
            pins[pin] = net
        out = f"out{g}"
        pins[t.output] = out
        nl.outputs.append(out)
        nl.gates.append(Gate(f"u{g}", kind, pins))
    validate_netlist(nl)
    return nl
