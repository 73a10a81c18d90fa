"""Certificate fixtures for chain equivalences, transcribed from the source
tables, with lattice embeddings recovered by exact row identities.

Each row states log F1 = eps * log F2 + sum_i sigma_i * log F_i for one
layer of a two-layer chain on its topology embedding; `extra_edges` are the
topology edges beyond the chain edges (bent embeddings make chain-non-
adjacent qubits neighbours).  The green-layer headers of the four-qubit
green-blue-green table are corrected to the products the multi-layer
experiment actually measures; as printed they fail the exact identity for
every embedding (apparent copy of the preceding table's row).
"""

# Chain edge colorings (first layer "B", second "G"), qubits 0..k-1 in line
# order; the closed square is the cycle 0-1-3-2.
CHAIN_BGB = {"B": [(0, 1), (2, 3)], "G": [(1, 2)]}
CHAIN_GBG = {"B": [(1, 2)], "G": [(0, 1), (2, 3)]}
CHAIN_GBGB = {"B": [(1, 2), (3, 4)], "G": [(0, 1), (2, 3)]}
CHAIN_SQUARE = {"B": [(0, 1), (2, 3)], "G": [(0, 2), (1, 3)]}

# (name, qubits, chain, extra_edges, layer, F1, F2_factors, eps, sigmas, F_entries)
TABLE_ROWS = [
    # Four-qubit open chains, blue-green-blue; straight then bent (0,3).
    ("4qo.1.B", 4, CHAIN_BGB, [], "B",
     "XIII", ["XIXI", "XIXZ"], "1/2", ["-1/2"], [["IIXZ", "IIXI"]]),
    ("4qo.1.G", 4, CHAIN_BGB, [], "G",
     "IIXI", ["XZXZ", "XZXI"], "-1/2", ["1/2", "-1/2", "1/4", "3/4"],
     [["XZII", "XZII"], ["IZII", "IZII"], ["IIXZ", "IZXZ"], ["IZXI", "IIXI"]]),
    ("4qo.2.B", 4, CHAIN_BGB, [(0, 3)], "B",
     "XIII", ["XIXI", "XIXZ"], "1/2", ["1/4", "-1/2", "1/4", "-1/4"],
     [["IIIZ", "IIIZ"], ["IIXZ", "IIXI"], ["XZII", "XIII"], ["XIIZ", "XZIZ"]]),
    ("4qo.2.G", 4, CHAIN_BGB, [(0, 3)], "G",
     "IIXI", ["XZXZ", "XZXI"], "-1/2",
     ["-1/2", "1/4", "3/4", "-1/4", "1/2", "-1/4", "1/4"],
     [["IZII", "IZII"], ["IIXZ", "IZXZ"], ["IIXI", "IZXI"], ["IIIZ", "IIIZ"],
      ["XZII", "XZII"], ["XIII", "XIII"], ["XIIZ", "XIIZ"]]),
    # Four-qubit open chains, green-blue-green (green headers corrected).
    ("4qo-gbg.1.B", 4, CHAIN_GBG, [], "B",
     "IXII", ["IXIX", "ZXIX"], "1/2", ["-1/4", "1/4", "-1/2"],
     [["ZXII", "ZXZI"], ["IXZI", "IXII"], ["IIIX", "IIIX"]]),
    ("4qo-gbg.1.G", 4, CHAIN_GBG, [], "G",
     "IIIX", ["IXZX", "ZXZX"], "-1/2", ["-1/2", "1/2", "1"],
     [["IIZI", "IIZI"], ["IXZI", "ZXZI"], ["IIZX", "IIIX"]]),
    ("4qo-gbg.2.B", 4, CHAIN_GBG, [(0, 3)], "B",
     "IXII", ["IXIX", "ZXIX"], "1/2", ["1/4", "-1/4", "-1/4", "1/4", "-1/4"],
     [["ZIII", "ZIII"], ["IIIX", "IIIX"], ["ZXII", "ZXZI"], ["IXZI", "IXII"],
      ["ZIIX", "ZIIX"]]),
    ("4qo-gbg.2.G", 4, CHAIN_GBG, [(0, 3)], "G",
     "IIIX", ["IXZX", "ZXZX"], "-1/2", ["-1/4", "1/4", "1/2", "-1/2", "3/4"],
     [["ZIII", "ZIII"], ["ZIIX", "ZIZX"], ["IXZI", "ZXZI"], ["IIZI", "IIZI"],
      ["IIZX", "IIIX"]]),
    # Five-qubit open chains: straight, bent (0,3), bent (1,4).
    ("5qo.1.B", 5, CHAIN_GBGB, [], "B",
     "IXIII", ["IXIXI", "ZXIXZ"], "1/2", ["-1/4", "1/4", "-1/2"],
     [["ZXIII", "ZXZII"], ["IXIII", "IXZII"], ["IIIXI", "IIIXZ"]]),
    ("5qo.1.G", 5, CHAIN_GBGB, [], "G",
     "IIIXI", ["IXZXZ", "ZXZXI"], "-1/2", ["-1/2", "3/4", "1/4", "1/2"],
     [["IIZII", "IIZII"], ["IIZXI", "IIIXI"], ["IIIXZ", "IIZXZ"],
      ["IXZII", "ZXZII"]]),
    ("5qo.2.B", 5, CHAIN_GBGB, [(0, 3)], "B",
     "IXIII", ["IXIXI", "ZXIXZ"], "1/2", ["1/4", "-1/4", "-1/4", "1/4", "-1/4"],
     [["IXZII", "IXIII"], ["ZIIXI", "ZIIXZ"], ["ZXIII", "ZXZII"],
      ["ZIIII", "ZIIII"], ["IIIXZ", "IIIXI"]]),
    ("5qo.2.G", 5, CHAIN_GBGB, [(0, 3)], "G",
     "IIIXI", ["IXZXZ", "ZXZXI"], "-1/2",
     ["1/4", "1/4", "-1/2", "1/2", "-1/4", "1/2"],
     [["IIIXZ", "IIZXZ"], ["ZIIXI", "ZIZXI"], ["IIZII", "IIZII"],
      ["IXZII", "ZXZII"], ["ZIIII", "ZIIII"], ["IIIXI", "IIZXI"]]),
    ("5qo.3.B", 5, CHAIN_GBGB, [(1, 4)], "B",
     "IXIII", ["IXIXI", "ZXIXZ"], "1/2", ["1/2", "-1/2", "-1/4", "-1/4", "1/4"],
     [["IXZII", "IXIII"], ["IIIXI", "IIIXZ"], ["IXIIZ", "IXZIZ"],
      ["ZXIII", "ZXZII"], ["IIIIZ", "IIIIZ"]]),
    ("5qo.3.G", 5, CHAIN_GBGB, [(1, 4)], "G",
     "IIIXI", ["IXZXZ", "ZXZXI"], "-1/2",
     ["1/4", "1/2", "-1/4", "1/4", "3/4", "-1/4", "-1/2"],
     [["IXIIZ", "ZXIIZ"], ["IXZII", "ZXZII"], ["ZXIII", "IXIII"],
      ["IIIXZ", "IIZXZ"], ["IIIXI", "IIZXI"], ["IIIIZ", "IIIIZ"],
      ["IIZII", "IIZII"]]),
    # Four-qubit closed chain (square).
    ("4qc.B", 4, CHAIN_SQUARE, [], "B",
     "IXII", ["IXXX", "IYYX"], "1/2",
     ["1/4", "-1/2", "-1/4", "-1/4", "-1/4", "-1/4", "-1/4", "1/2", "1/4",
      "1/4", "1/2", "-1/4"],
     [["IIXY", "IIXY"], ["IIXY", "IIYX"], ["IXIX", "ZXZX"], ["ZIII", "ZIII"],
      ["IIXX", "IIXX"], ["IYIX", "ZYZX"], ["IIZI", "IIZI"], ["IIZX", "IIIX"],
      ["ZIZI", "ZIZI"], ["IXII", "ZXII"], ["IXII", "ZYII"], ["ZYII", "IYII"]]),
    ("4qc.G", 4, CHAIN_SQUARE, [], "G",
     "IIXI", ["ZXYY", "ZYXY"], "-1/2",
     ["-1/4", "1/4", "1/4", "-1/4", "1/4", "1/4", "1/2", "-1/4", "-1/4",
      "1/4", "1/2", "-1/4", "1/4", "-1/2", "-1/4", "1/4"],
     [["ZZII", "ZZII"], ["IXIY", "IXIY"], ["IIXY", "ZZXY"], ["IIYI", "ZIYI"],
      ["ZXII", "ZXIZ"], ["ZYII", "ZYIZ"], ["IXIX", "IYIY"], ["IXIZ", "IXII"],
      ["ZIII", "ZIII"], ["IZII", "IZII"], ["IIXI", "ZIYI"], ["IXIX", "IXIX"],
      ["ZIXI", "IIXI"], ["IIIY", "IZIY"], ["IYII", "IYIZ"], ["IIYY", "ZZYY"]]),
]
