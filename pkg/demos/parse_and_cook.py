"""Parse a few spellings of the same character and print the trees."""

from hangrep import parse_stream, write_cooked


def show(tree, indent=0):
    head = f"<{tree.head.text}> " if tree.head is not None else ""
    print("  " * indent + f"{head}{tree.functor.text}/{len(tree.children)}")
    for child in tree.children:
        show(child, indent + 1)


# The same decomposition of 語, written four ways: raw Unicode IDS
# characters, explicit brackets, an alias spelling, and with an extra
# head naming the right-hand component.
spellings = [
    "⿰言⿱五口",
    "[⿰]<言>(;)[⿱]<五>(;)<口>(;)",
    "[lr]言⿱五口",
    "<語>⿰言<吾>⿱五口",
]

for text in spellings:
    trees, diagnostics = parse_stream(text)
    assert not diagnostics
    print(f"input:  {text}")
    print(f"cooked: {write_cooked(trees[0])}")
    show(trees[0])
    print()

# Parsing is line-granular: a broken entry costs only its own line.
broken = "⿰日月\n⿱士\n語\n"
trees, diagnostics = parse_stream(broken)
print(f"{len(trees)} trees survive from {broken!r}")
for d in diagnostics:
    print(f"  recovered: offset {d.offset}: {d.message}")
