#!/usr/bin/env python3
"""Generate the synthetic 144-gene stand-in dataset under fixtures/.

Everything written here is synthetic: gene symbols, coordinates, variant ids,
q-values, narratives and citations are produced from a fixed RNG seed so the
files are reproducible byte for byte. Re-run from the repository root:

    python3 scripts/make_fixture.py
"""
import json
import os
import random

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")
N_GENES = 144
SEED = 20240601

REGIONS = [
    "frontal_cortex", "amygdala", "anterior_cingulate_cortex", "caudate_basal_ganglia",
    "cerebellar_hemisphere", "cerebellum", "nucleus_accumbens_basal_ganglia",
    "putamen_basal_ganglia", "cervical_spinal_cord", "cortex", "hypothalamus",
    "hippocampus", "substantia_nigra",
]
KINDS = ["eQTL", "sQTL"]
CHROMS = [str(c) for c in range(1, 23)] + ["X"]

MECHANISMS = [
    "variant increases amyloid burden",
    "loss-of-function variants impair microglial clearance of amyloid-beta",
    "risk allele alters tau phosphorylation in cortical neurons",
    "missense variant disrupts lipid transport to neurons",
    "splice variant reduces synaptic vesicle recycling",
    "promoter variant raises neuroinflammatory cytokine expression",
    "variant shifts APP processing toward the amyloidogenic pathway",
    "rare coding variant weakens endosomal trafficking of APP",
    "variant lowers cholesterol efflux in astrocytes",
    "truncating variant compromises blood-brain barrier integrity",
]
FILLER = [
    "The gene is broadly expressed across tissues.",
    "Knockout mice show no overt developmental phenotype.",
    "Several isoforms arise from alternative promoter usage.",
    "The encoded protein localizes to the plasma membrane.",
    "Homozygous variants were reported in unrelated families with other conditions.",
]


def symbol(i):
    s = ""
    i += 1
    while i > 0:
        i, r = divmod(i - 1, 26)
        s = chr(ord("A") + r) + s
    return "GENE" + s


def main():
    rng = random.Random(SEED)
    genes = [symbol(i) for i in range(N_GENES)]
    out = os.path.join(ROOT, "ad144")
    os.makedirs(os.path.join(out, "qtl"), exist_ok=True)

    with open(os.path.join(out, "seed_genes.txt"), "w") as f:
        f.write("# Synthetic stand-in seed gene list (144 symbols)\n")
        for g in genes:
            f.write(g + "\n")

    annotations = {}
    for i, g in enumerate(genes):
        if g == "GENEA":
            annotations[g] = ("19", 1000, 2000, "+")
            continue
        if g == "GENEE":
            annotations[g] = ("7", 500, 500, "-")
            continue
        chrom = "MT" if i == 100 else ("Y" if i == 101 else rng.choice(CHROMS))
        start = rng.randint(10_000, 150_000_000)
        end = start + rng.randint(1_000, 500_000)
        annotations[g] = (chrom, start, end, rng.choice("+-"))
    with open(os.path.join(out, "gene_annotations.tsv"), "w") as f:
        f.write("gene_symbol\tchromosome\tstart\tend\tstrand\n")
        for g in genes:
            c, s, e, st = annotations[g]
            f.write(f"{g}\t{c}\t{s}\t{e}\t{st}\n")

    fixed = {
        ("GENEA", "hippocampus", "sQTL"): [0.0031],
        ("GENEA", "frontal_cortex", "eQTL"): [0.04],
        ("GENEC", "hippocampus", "eQTL"): [0.01],
        ("GENEC", "amygdala", "eQTL"): [0.03],
        ("GENEC", "cortex", "eQTL"): [0.2],
        ("GENED", "cerebellum", "eQTL"): [0.05],
        ("GENED", "putamen_basal_ganglia", "eQTL"): [0.0500001],
    }
    reserved = {"GENEA", "GENEB", "GENEC", "GENED"}
    tables = {(r, k): [] for r in REGIONS for k in KINDS}
    for (g, r, k), qs in fixed.items():
        for q in qs:
            tables[(r, k)].append((g, q))
    for r in REGIONS:
        for k in KINDS:
            for g in genes:
                if g in reserved or rng.random() >= 0.3:
                    continue
                for _ in range(rng.randint(1, 3)):
                    if rng.random() < 0.6:
                        q = rng.uniform(1e-8, 0.05)
                    else:
                        q = rng.uniform(0.05, 1.0)
                    tables[(r, k)].append((g, q))

    manifest = [
        "# Synthetic stand-in dataset; see scripts/make_fixture.py",
        'seed_genes = "seed_genes.txt"',
        'molecular_genetics = "molecular_genetics.jsonl"',
        "significance_alpha = 0.05",
        "",
        "[annotations]",
        'path = "gene_annotations.tsv"',
        'citation = "fixture gene annotation table (synthetic GTEx-style export)"',
    ]
    for r in REGIONS:
        for k in KINDS:
            rows = tables[(r, k)]
            name = f"qtl/{r}.{k}.tsv"
            with open(os.path.join(out, name), "w") as f:
                f.write("gene_symbol\tvariant_id\tq_value\n")
                for n, (g, q) in enumerate(rows):
                    c, s, e, _ = annotations[g]
                    pos = s + 1 + n * 1000 + rng.randint(0, 999)
                    ref, alt = rng.sample("ACGT", 2)
                    f.write(f"{g}\tchr{c}_{pos}_{ref}_{alt}_b38\t{q:.6g}\n")
            manifest += [
                "",
                "[[qtl]]",
                f'path = "{name}"',
                f'region = "{r}"',
                f'kind = "{k}"',
                f'citation = "fixture {k} significance table, {r.replace("_", " ")} (synthetic)"',
            ]
    with open(os.path.join(out, "manifest.toml"), "w") as f:
        f.write("\n".join(manifest) + "\n")

    records = []
    for i, g in enumerate(genes):
        if g == "GENED":
            continue
        if g not in reserved and rng.random() < 0.2:
            continue
        if g in ("GENEA", "GENEC"):
            related = True
        elif g == "GENEB":
            related = False
        else:
            related = rng.random() < 0.6
        filler = rng.sample(FILLER, 2)
        if related:
            reasoning = "variant increases amyloid burden" if g == "GENEA" else rng.choice(MECHANISMS)
            summary = f"{filler[0]} In affected carriers, a {reasoning}. {filler[1]}"
        else:
            reasoning = ""
            summary = f"{filler[0]} {filler[1]}"
        cites = [f"fixture:{g}:{n + 1}" for n in range(rng.randint(0, 2) if g not in reserved else 1)]
        records.append({
            "gene_symbol": g,
            "summary_text": summary,
            "curated_reasoning": reasoning,
            "ad_related": related,
            "citations": cites,
        })
    with open(os.path.join(out, "molecular_genetics.jsonl"), "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")

    mini = os.path.join(ROOT, "mini")
    os.makedirs(mini, exist_ok=True)
    with open(os.path.join(mini, "hippocampus.sQTL.tsv"), "w") as f:
        f.write("gene_symbol\tvariant_id\tq_value\n")
        f.write("GENEA\tchr19_1500_C_T_b38\t0.0031\n")
        f.write("GENEA\tchr19_1720_G_A_b38\t0.21\n")
        f.write("GENEC\tchr3_880012_T_G_b38\t4.5e-06\n")
    with open(os.path.join(mini, "molecular_genetics.jsonl"), "w") as f:
        for n in range(10):
            related = n < 7
            g = symbol(n)
            f.write(json.dumps({
                "gene_symbol": g,
                "summary_text": f"Synthetic molecular genetics summary for {g}.",
                "curated_reasoning": MECHANISMS[n] if related else "",
                "ad_related": related,
                "citations": [f"fixture:{g}:1"],
            }) + "\n")


if __name__ == "__main__":
    main()
