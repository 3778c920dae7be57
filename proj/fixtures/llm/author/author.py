#!/usr/bin/env python3
"""Rebuilds the frozen chat recordings in fixtures/llm/.

Step answers are written here (schemata produced with `dfmforge apply` from
the op lists next to this script), fed through the script backend and
recorded. The recordings are then served by the replay backend in tests.

usage: author.py <path to dfmforge binary>
"""
import json
import os
import subprocess
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.normpath(os.path.join(HERE, "..", "..", ".."))
OUT = os.path.normpath(os.path.join(HERE, ".."))
STEPS = ["rename", "additivity", "descriptive", "optional", "time_hierarchy", "removal"]


def run(tool, *args, stdin=None):
    r = subprocess.run([tool, *args], capture_output=True, text=True, input=stdin)
    if r.returncode not in (0, 1):
        sys.exit(f"{' '.join(args)} failed ({r.returncode}): {r.stderr}")
    return r.stdout


def chain(tool, draft, ops_by_step, steps):
    """Schema text after each step, applying the op list for that step."""
    out = {}
    cur = draft
    with tempfile.TemporaryDirectory() as tmp:
        for st in steps:
            ops = os.path.join(tmp, st + ".json")
            with open(ops, "w") as f:
                json.dump(ops_by_step[st], f)
            text = run(tool, "apply", cur, ops)
            cur = os.path.join(tmp, st + ".yaml")
            with open(cur, "w") as f:
                f.write(text)
            out[st] = text
    return out


def fenced(y, lang="yaml"):
    return f"```{lang}\n{y.rstrip()}\n```"


def record(tool, name, draft, answers, extra_args):
    rec = os.path.join(OUT, name + ".jsonl")
    if os.path.exists(rec):
        os.remove(rec)
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
        json.dump(answers, f, indent=1)
        script = f.name
    final = run(tool, "refine-llm", draft, "--backend", "script:" + script, "--record", rec, *extra_args)
    os.remove(script)
    return final


def main():
    tool = sys.argv[1]
    drafts = os.path.join(ROOT, "fixtures", "drafts")

    # C2, improved prompts: every step lands on the expected shape.
    with open(os.path.join(HERE, "c2_ops.json")) as f:
        ops = json.load(f)
    c2 = chain(tool, os.path.join(drafts, "c2_purchases.yaml"), ops, STEPS)
    answers = [
        "Step 1: I renamed the fact, the measures and the attributes so that an end-user can read them "
        "without knowing the source tables.\n\n" + fenced(c2["rename"]),
        "UnitPrice cannot be summed over any dimension, so it is non-additive and aggregated by average. "
        "Quantity and Revenue are additive and keep their names.\n\n" + fenced(c2["additivity"]),
        "ProductName, ProductWeight, SupplierName and StoreManager only describe their parent and are not "
        "useful for aggregation, so they are descriptive.\n" + fenced(c2["descriptive"], "") + "\n",
        "Since not all regions have a state, State is optional.\n\n" + fenced(c2["optional"]),
        c2["time_hierarchy"],
        "Here is the schema without StoreId. City is now directly connected to the fact and StoreManager, "
        "a descriptive attribute of StoreId, has been removed as well.\n\n" + fenced(c2["removal"])
        + "\n\nLet me know if you need further changes.",
    ]
    final = record(tool, "c2_improved", os.path.join(drafts, "c2_purchases.yaml"), answers,
                   ["--mode", "improved", "--session-id", "c2",
                    "--optional-statement", "Not all regions have a state.",
                    "--removal-statement", "StoreId is not interesting to me."])
    with open(os.path.join(OUT, "c2_improved_refined.yaml"), "w") as f:
        f.write(final)

    # C2, basic prompts: a wrong additivity, an answer without YAML, a
    # truncated time hierarchy.
    basic_ops = dict(ops)
    basic_ops["rename"] = [o if o.get("new") != "ProductWeight" else dict(o, new="Weight") for o in ops["rename"]]
    basic_ops["additivity"] = [{"kind": "set_additivity", "measure": "UnitPrice", "level": "semi_additive"}]
    basic_ops["time_hierarchy"] = [{"kind": "complete_time_hierarchy", "date": "Date"},
                                   {"kind": "remove_attribute", "attr": "Month"}]
    basic_steps = ["rename", "additivity", "optional", "time_hierarchy", "removal"]
    b = chain(tool, os.path.join(drafts, "c2_purchases.yaml"), basic_ops, basic_steps)
    answers = [
        fenced(b["rename"]),
        "UnitPrice is semi-additive.\n" + fenced(b["additivity"]),
        "In this schema ProductName, ProductWeight and SupplierName could be descriptive attributes, "
        "since they give additional information about products and suppliers.",
        fenced(b["optional"]),
        fenced(b["time_hierarchy"]),
        fenced(b["removal"]),
    ]
    final = record(tool, "c2_basic", os.path.join(drafts, "c2_purchases.yaml"), answers,
                   ["--mode", "basic", "--session-id", "c2-basic",
                    "--optional-statement", "Not all regions have a state.",
                    "--removal-statement", "StoreId is not interesting to me."])
    with open(os.path.join(OUT, "c2_basic_refined.yaml"), "w") as f:
        f.write(final)

    # C4: the rename answer splits the shared date into two hierarchies; the
    # fix prompt merges them back.
    with open(os.path.join(HERE, "c4_rename_ops.json")) as f:
        c4_ops = json.load(f)
    fixed = chain(tool, os.path.join(drafts, "c4_rentals.yaml"), {"rename": c4_ops}, ["rename"])["rename"]
    split = split_dates(fixed)
    run(tool, "validate", "-", stdin=split)
    answers = ["Step 1: names are now intuitive.\n\n" + fenced(split)]
    rec = os.path.join(OUT, "c4_fix.jsonl")
    with tempfile.TemporaryDirectory() as tmp:
        chat = os.path.join(tmp, "chat.jsonl")
        record(tool, "c4_fix", os.path.join(drafts, "c4_rentals.yaml"), answers,
               ["--mode", "improved", "--session-id", "c4", "--steps", "rename", "--transcript", chat])
        fix_answer = os.path.join(tmp, "fix.json")
        with open(fix_answer, "w") as f:
            json.dump(["I merged the two dates into a single Date node shared by the pick-up and the drop-off "
                       "roles.\n\n" + fenced(fixed)], f)
        merged = run(tool, "fix", chat, FIX_TEXT, "--backend", "script:" + fix_answer, "--record", rec)
    with open(os.path.join(OUT, "c4_fixed.yaml"), "w") as f:
        f.write(merged)


FIX_TEXT = "Merge ``drop-off date'' and ``pick-up date'' into a single ``date'' node."


def split_dates(yaml_text):
    """Two role-free date hierarchies instead of one shared Date."""
    lines = yaml_text.splitlines()
    out = []
    i = 0
    while i < len(lines):
        line = lines[i]
        if line == "  - from: Date":
            child = lines[i + 1].split(": ", 1)[1]
            for p in ("PickUp", "DropOff"):
                out += [f"  - from: {p}Date", f"    to: {p}{child}"]
            i += 2
            continue
        if line == "  - from: Rental" and lines[i + 1] == "    to: Date":
            role = lines[i + 2].split(": ", 1)[1]
            out += ["  - from: Rental", "    to: " + ("DropOffDate" if role.startswith("dropoff") else "PickUpDate")]
            i += 3
            continue
        out.append(line)
        i += 1
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    main()
