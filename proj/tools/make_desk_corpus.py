#!/usr/bin/env python3
# Copyright 2026 The mixlm Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the desk corpus used by the acceptance suite.

Sources are two text files shipped inside the gensim wheel's test data:
  gensim/test/test_data/lee_background.cor  (news articles)
  gensim/test/test_data/enwiki-latest-pages-articles1.xml-p000000010p000030302-shortened.bz2

Usage:
  pip download gensim==4.4.0 --no-deps -d /tmp/gs
  python3 tools/make_desk_corpus.py /tmp/gs/gensim-*.whl tests/data

Output is one sentence per line, lowercased, punctuation split into separate
tokens. Sentences are dealt round-robin into train/test (every 8th sentence
goes to test), so the split is deterministic.
"""

import bz2
import html
import re
import sys
import zipfile

LEE = "gensim/test/test_data/lee_background.cor"
WIKI = ("gensim/test/test_data/"
        "enwiki-latest-pages-articles1.xml-p000000010p000030302-shortened.bz2")

TOKEN_RE = re.compile(r"[a-z]+(?:'[a-z]+)?|\d+(?:[.,]\d+)*|[.,;:!?()\"'%$&-]")
SENT_SPLIT_RE = re.compile(r"(?<=[.!?])\s+(?=[A-Z\"(])")


def strip_nested(text, open_tok, close_tok):
    out = []
    depth = 0
    i = 0
    n = len(text)
    lo, lc = len(open_tok), len(close_tok)
    while i < n:
        if text.startswith(open_tok, i):
            depth += 1
            i += lo
        elif depth and text.startswith(close_tok, i):
            depth -= 1
            i += lc
        else:
            if not depth:
                out.append(text[i])
            i += 1
    return "".join(out)


def link_text(match):
    body = match.group(1)
    if ":" in body.split("|")[0]:
        return ""
    return body.split("|")[-1]


def clean_wiki(markup):
    text = html.unescape(markup)
    text = re.sub(r"<!--.*?-->", " ", text, flags=re.S)
    text = re.sub(r"<ref[^>]*/>", " ", text)
    text = re.sub(r"<ref[^>]*>.*?</ref>", " ", text, flags=re.S)
    text = strip_nested(text, "{{", "}}")
    text = strip_nested(text, "{|", "|}")
    text = re.sub(r"\[\[(?:File|Image|Category):[^\[\]]*(?:\[\[[^\]]*\]\][^\[\]]*)*\]\]",
                  " ", text)
    text = re.sub(r"\[\[([^\[\]]*)\]\]", link_text, text)
    text = re.sub(r"\[https?://\S+\s*([^\]]*)\]", r"\1", text)
    text = re.sub(r"<[^>]+>", " ", text)
    text = text.replace("'''", "").replace("''", "")
    paragraphs = []
    for line in text.split("\n"):
        line = line.strip()
        if not line or line[0] in "=*#:;|!{}":
            continue
        if len(line.split()) < 8:
            continue
        paragraphs.append(line)
    return paragraphs


def sentences(paragraph):
    for sent in SENT_SPLIT_RE.split(paragraph):
        toks = TOKEN_RE.findall(sent.lower())
        if 3 <= len(toks) <= 80:
            yield " ".join(toks)


def main():
    wheel, out_dir = sys.argv[1], sys.argv[2]
    z = zipfile.ZipFile(wheel)
    paragraphs = [p for p in z.read(LEE).decode("utf-8").split("\n") if p.strip()]
    xml = bz2.decompress(z.read(WIKI)).decode("utf-8")
    for page in re.findall(r"<text[^>]*>(.*?)</text>", xml, flags=re.S):
        if page.lstrip().lower().startswith("#redirect"):
            continue
        paragraphs.extend(clean_wiki(page))

    train, test = [], []
    i = 0
    for p in paragraphs:
        for s in sentences(p):
            (test if i % 8 == 7 else train).append(s)
            i += 1
    with open(f"{out_dir}/desk_train.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(train) + "\n")
    with open(f"{out_dir}/desk_test.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(test) + "\n")
    words = lambda ss: sum(len(s.split()) for s in ss)
    print(f"train: {len(train)} sentences, {words(train)} tokens")
    print(f"test:  {len(test)} sentences, {words(test)} tokens")


if __name__ == "__main__":
    main()
