#!/usr/bin/env python3
"""Regenerates the bundled BPMN models.

Participant keys are the demo identities used by the scenarios: the secret
key is SHA-256("zkwf-demo-key:" + seed) and the public key its Ed25519 point.
"""

import hashlib
import pathlib
from xml.sax.saxutils import escape, quoteattr

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

OUT = pathlib.Path(__file__).resolve().parent


def pk(seed):
    sk = hashlib.sha256(b"zkwf-demo-key:" + seed.encode()).digest()
    pub = Ed25519PrivateKey.from_private_bytes(sk).public_key()
    return pub.public_bytes(Encoding.Raw, PublicFormat.Raw).hex()


TAGS = {
    "start": "startEvent",
    "end": "endEvent",
    "task": "task",
    "throw": "intermediateThrowEvent",
    "catch": "intermediateCatchEvent",
    "xor": "exclusiveGateway",
    "and": "parallelGateway",
}


class Process:
    def __init__(self, pid, name, key=None, pool=None, pool_key=None):
        self.pid, self.name, self.key = pid, name, key
        self.pool, self.pool_key = pool, pool_key
        self.nodes, self.flows, self.lanes = [], [], []

    def node(self, kind, nid, name=None, key=None, writes=None, default=None):
        self.nodes.append(dict(kind=kind, id=nid, name=name or nid, key=key, writes=writes, default=default))
        return nid

    def flow(self, src, dst, cond=None):
        fid = f"f_{src}_{dst}"
        self.flows.append((fid, src, dst, cond))
        return fid

    def chain(self, *ids):
        for a, b in zip(ids, ids[1:]):
            self.flow(a, b)

    def lane(self, lid, name, key, members, children=()):
        self.lanes.append(dict(id=lid, name=name, key=key, members=list(members), children=list(children)))

    def xml(self, out):
        key = f" zkp:publicKey={quoteattr(self.key)}" if self.key else ""
        out.append(f'  <bpmn:process id="{self.pid}" name={quoteattr(self.name)} isExecutable="true"{key}>')
        if self.lanes:
            out.append(f'    <bpmn:laneSet id="{self.pid}_lanes">')
            for lane in self.lanes:
                emit_lane(out, lane, 6)
            out.append("    </bpmn:laneSet>")
        for n in self.nodes:
            attrs = f'id="{n["id"]}" name={quoteattr(n["name"])}'
            if n["key"]:
                attrs += f" zkp:publicKey={quoteattr(n['key'])}"
            if n["writes"]:
                attrs += f" zkp:variables={quoteattr(','.join(n['writes']))}"
            if n["default"]:
                attrs += f' default="{n["default"]}"'
            tag = TAGS[n["kind"]]
            if n["kind"] in ("throw", "catch"):
                out.append(f"    <bpmn:{tag} {attrs}>")
                out.append("      <bpmn:messageEventDefinition />")
                out.append(f"    </bpmn:{tag}>")
            else:
                out.append(f"    <bpmn:{tag} {attrs} />")
        for fid, src, dst, cond in self.flows:
            if cond:
                out.append(f'    <bpmn:sequenceFlow id="{fid}" sourceRef="{src}" targetRef="{dst}">')
                out.append(f"      <bpmn:conditionExpression>{escape(cond)}</bpmn:conditionExpression>")
                out.append("    </bpmn:sequenceFlow>")
            else:
                out.append(f'    <bpmn:sequenceFlow id="{fid}" sourceRef="{src}" targetRef="{dst}" />')
        out.append("  </bpmn:process>")


def emit_lane(out, lane, indent):
    pad = " " * indent
    key = f" zkp:publicKey={quoteattr(lane['key'])}" if lane["key"] else ""
    out.append(f'{pad}<bpmn:lane id="{lane["id"]}" name={quoteattr(lane["name"])}{key}>')
    for m in lane["members"]:
        out.append(f"{pad}  <bpmn:flowNodeRef>{m}</bpmn:flowNodeRef>")
    if lane["children"]:
        out.append(f'{pad}  <bpmn:childLaneSet id="{lane["id"]}_children">')
        for child in lane["children"]:
            emit_lane(out, child, indent + 4)
        out.append(f"{pad}  </bpmn:childLaneSet>")
    out.append(f"{pad}</bpmn:lane>")


def write(name, processes, messages=(), collaboration=True):
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<bpmn:definitions xmlns:bpmn="http://www.omg.org/spec/BPMN/20100524/MODEL"'
           ' xmlns:zkp="http://zkwf.dev/schema/zkp"'
           f' id="{name}_definitions" targetNamespace="http://zkwf.dev/models">']
    if collaboration:
        out.append(f'  <bpmn:collaboration id="{name}_collaboration">')
        for p in processes:
            key = f" zkp:publicKey={quoteattr(p.pool_key)}" if p.pool_key else ""
            out.append(f'    <bpmn:participant id="{p.pool}" name={quoteattr(p.name)} processRef="{p.pid}"{key} />')
        for i, (src, dst) in enumerate(messages, 1):
            out.append(f'    <bpmn:messageFlow id="{name}_m{i}" sourceRef="{src}" targetRef="{dst}" />')
        out.append("  </bpmn:collaboration>")
    for p in processes:
        p.xml(out)
    out.append("</bpmn:definitions>")
    (OUT / f"{name}.bpmn").write_text("\n".join(out) + "\n")


ALICE, BOB, CAROL = pk("alice"), pk("bob"), pk("carol")


def linear():
    p = Process("office", "Office", key=ALICE)
    p.node("start", "s", "Request received")
    p.node("task", "t", "Handle request")
    p.node("end", "e", "Done")
    p.chain("s", "t", "e")
    write("linear", [p], collaboration=False)


def diamond():
    p = Process("proc_diamond", "Workshop", pool="pool_workshop", pool_key=ALICE)
    p.node("start", "s")
    p.node("task", "a", "Accept order")
    p.node("and", "g_split")
    p.node("task", "b", "Build frame")
    p.node("task", "c", "Paint parts", key=BOB)
    p.node("and", "g_join")
    p.node("task", "d", "Assemble")
    p.node("end", "e")
    p.chain("s", "a", "g_split")
    p.flow("g_split", "b")
    p.flow("g_split", "c")
    p.flow("b", "g_join")
    p.flow("c", "g_join")
    p.chain("g_join", "d", "e")
    write("diamond", [p])


def exclusive():
    p = Process("proc_claims", "Claims", pool="pool_claims", pool_key=ALICE)
    p.node("start", "s")
    p.node("task", "a", "Assess claim", writes=["x"])
    p.node("xor", "g_split", default="f_g_split_c")
    p.node("task", "b", "Escalate", key=BOB)
    p.node("task", "c", "Settle")
    p.node("xor", "g_join")
    p.node("task", "d", "Close file")
    p.node("end", "e")
    p.chain("s", "a", "g_split")
    p.flow("g_split", "b", "x > 10")
    p.flow("g_split", "c")
    p.flow("b", "g_join")
    p.flow("c", "g_join")
    p.chain("g_join", "d", "e")
    write("exclusive", [p])


def nested():
    p = Process("proc_nested", "Factory", pool="pool_factory", pool_key=ALICE)
    p.node("start", "s")
    p.node("task", "a", "Plan")
    p.node("and", "g_outer_split")
    p.node("task", "b", "Prepare line", key=BOB)
    p.node("and", "g_inner_split")
    p.node("task", "c", "Machine part", key=BOB)
    p.node("task", "d", "Cast part", key=CAROL)
    p.node("and", "g_inner_join")
    p.node("task", "e", "Fit parts", key=BOB)
    p.node("task", "f", "Order packaging")
    p.node("and", "g_outer_join")
    p.node("task", "h", "Ship")
    p.node("end", "end")
    p.chain("s", "a", "g_outer_split")
    p.flow("g_outer_split", "b")
    p.flow("g_outer_split", "f")
    p.chain("b", "g_inner_split")
    p.flow("g_inner_split", "c")
    p.flow("g_inner_split", "d")
    p.flow("c", "g_inner_join")
    p.flow("d", "g_inner_join")
    p.chain("g_inner_join", "e", "g_outer_join")
    p.flow("f", "g_outer_join")
    p.chain("g_outer_join", "h", "end")
    write("nested", [p])


def message():
    buyer = Process("proc_buyer", "Buyer", pool="pool_buyer", pool_key=ALICE)
    buyer.node("start", "b_start")
    buyer.node("task", "b_order", "Write order", writes=["qty"])
    buyer.node("throw", "b_send", "Send order")
    buyer.node("end", "b_end")
    buyer.chain("b_start", "b_order", "b_send", "b_end")
    seller = Process("proc_seller", "Seller", pool="pool_seller", pool_key=BOB)
    seller.node("start", "s_start")
    seller.node("catch", "s_receive", "Receive order")
    seller.node("task", "s_ship", "Ship goods")
    seller.node("end", "s_end")
    seller.chain("s_start", "s_receive", "s_ship", "s_end")
    write("message", [buyer, seller], [("b_send", "s_receive")])


def multipool():
    a = Process("proc_supplier", "Supplier", pool="pool_supplier", pool_key=ALICE)
    a.node("start", "a_start")
    a.node("task", "a_quote", "Quote price", writes=["price"])
    a.node("throw", "a_send", "Send quote")
    a.node("end", "a_end")
    a.chain("a_start", "a_quote", "a_send", "a_end")
    b = Process("proc_broker", "Broker", pool="pool_broker", pool_key=BOB)
    b.node("start", "b_start")
    b.node("catch", "b_receive", "Receive quote")
    b.node("task", "b_markup", "Add margin", writes=["price"])
    b.node("throw", "b_forward", "Forward quote")
    b.node("end", "b_end")
    b.chain("b_start", "b_receive", "b_markup", "b_forward", "b_end")
    c = Process("proc_client", "Client", pool="pool_client", pool_key=CAROL)
    c.node("start", "c_start")
    c.node("catch", "c_receive", "Receive offer")
    c.node("end", "c_end")
    c.chain("c_start", "c_receive", "c_end")
    write("multipool", [a, b, c], [("a_send", "b_receive"), ("b_forward", "c_receive")])


def lanes():
    p = Process("proc_procurement", "Procurement", pool="pool_procurement")
    p.node("start", "s")
    p.node("task", "request", "Request purchase", writes=["amount"])
    p.node("xor", "g_split")
    p.node("task", "approve", "Manager approval")
    p.node("task", "audit", "Audit spend", key=CAROL)
    p.node("xor", "g_join")
    p.node("task", "order", "Place order")
    p.node("end", "e")
    p.chain("s", "request", "g_split")
    p.flow("g_split", "approve", "amount >= 100")
    p.flow("g_split", "audit", "amount <= 500")
    p.flow("approve", "g_join")
    p.flow("audit", "g_join")
    p.chain("g_join", "order", "e")
    p.lane("lane_staff", "Staff", ALICE, ["s", "request", "g_split", "order", "e"])
    p.lane("lane_management", "Management", None, [],
           children=[dict(id="lane_managers", name="Managers", key=BOB, members=["approve", "audit", "g_join"],
                          children=[])])
    write("lanes", [p])


def leasing():
    lessee, dealer, bank, insurer, registry = pk("lessee"), pk("dealer"), pk("bank"), pk("insurer"), pk("registry")

    c = Process("proc_customer", "Customer", pool="pool_customer", pool_key=lessee)
    for kind, nid, name, *rest in [
        ("start", "c_start", "Need a car"),
        ("task", "c_select_car", "Select car", ["carPrice"]),
        ("throw", "c_send_request", "Send leasing request"),
        ("catch", "c_recv_offer", "Receive offer"),
        ("task", "c_read_terms", "Read terms"),
        ("task", "c_review_offer", "Review offer", ["accepted"]),
        ("xor", "c_g_decide", "Offer acceptable?"),
        ("task", "c_sign_contract", "Sign contract"),
        ("throw", "c_send_signed", "Send signed contract"),
        ("and", "c_p_split", None),
        ("task", "c_pay_deposit", "Pay deposit", ["deposit"]),
        ("throw", "c_send_deposit", "Send deposit receipt"),
        ("throw", "c_insure_req", "Request insurance"),
        ("catch", "c_recv_policy", "Receive policy"),
        ("and", "c_p_join", None),
        ("catch", "c_recv_car", "Receive car"),
        ("task", "c_schedule_pickup", "Schedule pickup"),
        ("task", "c_confirm_receipt", "Confirm receipt"),
        ("end", "c_end_ok", "Car leased"),
        ("task", "c_decline", "Decline offer"),
        ("end", "c_end_declined", "Offer declined"),
    ]:
        c.node(kind, nid, name, writes=rest[0] if rest else None)
    c.nodes[6]["default"] = "f_c_g_decide_c_decline"
    c.chain("c_start", "c_select_car", "c_send_request", "c_recv_offer", "c_read_terms", "c_review_offer",
            "c_g_decide")
    c.flow("c_g_decide", "c_sign_contract", "accepted == 1")
    c.flow("c_g_decide", "c_decline")
    c.chain("c_decline", "c_end_declined")
    c.chain("c_sign_contract", "c_send_signed", "c_p_split")
    c.flow("c_p_split", "c_pay_deposit")
    c.flow("c_p_split", "c_insure_req")
    c.chain("c_pay_deposit", "c_send_deposit", "c_p_join")
    c.chain("c_insure_req", "c_recv_policy", "c_p_join")
    c.chain("c_p_join", "c_recv_car", "c_schedule_pickup", "c_confirm_receipt", "c_end_ok")

    d = Process("proc_dealer", "Dealer", pool="pool_dealer", pool_key=dealer)
    for kind, nid, name, *rest in [
        ("start", "d_start", "Open desk"),
        ("catch", "d_recv_request", "Receive request"),
        ("task", "d_check_stock", "Check stock", ["inStock"]),
        ("xor", "d_g_stock", "In stock?"),
        ("task", "d_prepare_offer", "Reserve car"),
        ("task", "d_order_factory", "Order from factory"),
        ("task", "d_receive_factory_car", "Receive factory car"),
        ("xor", "d_g_stock_join", None),
        ("task", "d_compute_rate", "Compute monthly rate", ["monthlyRate"]),
        ("throw", "d_send_offer", "Send offer"),
        ("catch", "d_recv_signed", "Receive signed contract"),
        ("and", "d_p_split", None),
        ("throw", "d_request_financing", "Request financing"),
        ("catch", "d_recv_financing", "Receive financing decision"),
        ("catch", "d_recv_deposit", "Receive deposit receipt"),
        ("task", "d_record_deposit", "Record deposit"),
        ("and", "d_p_join", None),
        ("task", "d_register_vehicle", "Register vehicle"),
        ("and", "d_p_prep", None),
        ("task", "d_quality_check", "Quality check"),
        ("task", "d_clean_car", "Clean car"),
        ("and", "d_p_prep_join", None),
        ("task", "d_prepare_delivery", "Prepare delivery"),
        ("throw", "d_deliver_car", "Deliver car"),
        ("task", "d_archive", "Archive contract"),
        ("end", "d_end", "Contract active"),
    ]:
        d.node(kind, nid, name, writes=rest[0] if rest else None)
    d.nodes[3]["default"] = "f_d_g_stock_d_order_factory"
    d.nodes[17]["key"] = registry
    d.chain("d_start", "d_recv_request", "d_check_stock", "d_g_stock")
    d.flow("d_g_stock", "d_prepare_offer", "inStock == 1")
    d.flow("d_g_stock", "d_order_factory")
    d.chain("d_order_factory", "d_receive_factory_car", "d_g_stock_join")
    d.chain("d_prepare_offer", "d_g_stock_join")
    d.chain("d_g_stock_join", "d_compute_rate", "d_send_offer", "d_recv_signed", "d_p_split")
    d.flow("d_p_split", "d_request_financing")
    d.flow("d_p_split", "d_recv_deposit")
    d.chain("d_request_financing", "d_recv_financing", "d_p_join")
    d.chain("d_recv_deposit", "d_record_deposit", "d_p_join")
    d.chain("d_p_join", "d_register_vehicle", "d_p_prep")
    d.flow("d_p_prep", "d_quality_check")
    d.flow("d_p_prep", "d_clean_car")
    d.chain("d_quality_check", "d_p_prep_join")
    d.chain("d_clean_car", "d_p_prep_join")
    d.chain("d_p_prep_join", "d_prepare_delivery", "d_deliver_car", "d_archive", "d_end")

    b = Process("proc_bank", "Bank and insurer", pool="pool_bank")
    for kind, nid, name, *rest in [
        ("start", "b_start", "Open case"),
        ("and", "b_p_split", None),
        ("catch", "b_recv_fin_req", "Receive financing request"),
        ("task", "b_credit_check", "Credit check", ["creditScore"]),
        ("xor", "b_g_credit", "Score sufficient?"),
        ("task", "b_approve", "Approve financing"),
        ("task", "b_manual_review", "Manual review"),
        ("xor", "b_g_credit_join", None),
        ("throw", "b_send_fin_ok", "Send financing decision"),
        ("catch", "b_recv_insure_req", "Receive insurance request"),
        ("task", "b_assess_risk", "Assess risk", ["riskClass"]),
        ("xor", "b_g_risk", "Low risk?"),
        ("task", "b_surcharge", "Apply surcharge"),
        ("xor", "b_g_risk_join", None),
        ("task", "b_issue_policy", "Issue policy"),
        ("task", "b_file_policy", "File policy"),
        ("throw", "b_send_policy", "Send policy"),
        ("and", "b_p_join", None),
        ("task", "b_book_contract", "Book contract"),
        ("task", "b_archive_file", "Archive file"),
        ("end", "b_end", "Case closed"),
    ]:
        b.node(kind, nid, name, writes=rest[0] if rest else None)
    b.nodes[4]["default"] = "f_b_g_credit_b_manual_review"
    b.nodes[11]["default"] = "f_b_g_risk_b_surcharge"
    b.chain("b_start", "b_p_split")
    b.flow("b_p_split", "b_recv_fin_req")
    b.flow("b_p_split", "b_recv_insure_req")
    b.chain("b_recv_fin_req", "b_credit_check", "b_g_credit")
    b.flow("b_g_credit", "b_approve", "creditScore >= 600 and monthlyRate * 24 <= carPrice")
    b.flow("b_g_credit", "b_manual_review")
    b.chain("b_approve", "b_g_credit_join")
    b.chain("b_manual_review", "b_g_credit_join")
    b.chain("b_g_credit_join", "b_send_fin_ok", "b_p_join")
    b.chain("b_recv_insure_req", "b_assess_risk", "b_g_risk")
    b.flow("b_g_risk", "b_g_risk_join", "riskClass <= 2")
    b.flow("b_g_risk", "b_surcharge")
    b.chain("b_surcharge", "b_g_risk_join")
    b.chain("b_g_risk_join", "b_issue_policy", "b_file_policy", "b_send_policy", "b_p_join")
    b.chain("b_p_join", "b_book_contract", "b_archive_file", "b_end")
    fin = ["b_start", "b_p_split", "b_recv_fin_req", "b_credit_check", "b_g_credit", "b_approve", "b_manual_review",
           "b_g_credit_join", "b_send_fin_ok", "b_p_join", "b_book_contract", "b_archive_file", "b_end"]
    ins = ["b_recv_insure_req", "b_assess_risk", "b_g_risk", "b_surcharge", "b_g_risk_join", "b_issue_policy",
           "b_file_policy", "b_send_policy"]
    b.lane("lane_financing", "Financing", bank, fin)
    b.lane("lane_insurance", "Insurance", insurer, ins)

    write("leasing", [c, d, b], [
        ("c_send_request", "d_recv_request"),
        ("d_send_offer", "c_recv_offer"),
        ("c_send_signed", "d_recv_signed"),
        ("c_send_deposit", "d_recv_deposit"),
        ("c_insure_req", "b_recv_insure_req"),
        ("b_send_policy", "c_recv_policy"),
        ("d_request_financing", "b_recv_fin_req"),
        ("b_send_fin_ok", "d_recv_financing"),
        ("d_deliver_car", "c_recv_car"),
    ])


if __name__ == "__main__":
    for build in (linear, diamond, exclusive, nested, message, multipool, lanes, leasing):
        build()
