# %% [markdown]
# # Cleaning news text into period-delimited sentences
#
# Sentence boundaries downstream are detected purely from terminal periods,
# so ingestion rewrites every other use of a period. Normalization rules fix
# quote/period order, guarantee termination, collapse `...`, and standardize
# `? .`; protection rules swap the periods inside initials, URLs, emails and
# decimals for placeholder tokens and remember how to undo it.

# %%
from xdis import preprocess_text, restore_protected, split_sentences

samples = [
    'The minister said "we will act" . Markets reacted fast',
    "Shares fell 3.2 percent...\nDetails at www.market.watch.co",
    "J. K. Rowling was contacted at j.rowling@books.co.uk\nShe declined? .",
]

for raw in samples:
    clean, protections = preprocess_text(raw)
    print("raw:  ", raw.replace("\n", "\\n"))
    print("clean:", clean)
    for p in protections:
        print(f"        protected {p.original!r} at offset {p.offset} as {p.placeholder}")
    print()

# %% [markdown]
# The protection map is a faithful inverse: applying it restores the text as
# it looked after the four normalization rules.

# %%
clean, protections = preprocess_text("Pay 9.99 to m.z@pay.io via www.fast.pay now")
print("clean:   ", clean)
print("restored:", restore_protected(clean, protections))

# %% [markdown]
# With periods disambiguated, splitting is trivial and spans carry exact
# character offsets back into the cleaned text.

# %%
clean, _ = preprocess_text(samples[0])
for span in split_sentences(clean):
    print(f"[{span.index}] chars {span.char_start:>3}..{span.char_end:<3} {span.text!r}")

# %% [markdown]
# Idempotence: feeding cleaned text back through the cleaner changes nothing,
# which is what makes re-ingestion and cached corpora safe.

# %%
again, again_protections = preprocess_text(clean)
print("unchanged:", again == clean, "| new protections:", len(again_protections))
