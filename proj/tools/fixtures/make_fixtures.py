#!/usr/bin/env python3
"""Regenerates the committed fixture data under fixtures/.

Deterministic: running it twice produces identical files.
"""
import html
import os
import random
import re
import shutil
import sys

sys.path.insert(0, os.path.dirname(__file__))
from norm import normalize_phrase, normalize_token  # noqa: E402
from vocab_terms import BOTH, ELECTRICAL, MECHANICAL  # noqa: E402

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..', 'fixtures'))

GOALS = [
    'professional development', 'specialisation', 'marketing', 'promotion to management',
    'professional registration', 'career change', 'technical leadership', 'entrepreneurship',
]
INTERESTS = [
    'entertainment', 'sport', 'outdoors', 'travel', 'reading', 'music', 'technology',
    'family', 'cooking', 'fitness', 'gaming', 'volunteering',
]

VOCAB = ([(t, 'electrical') for t in ELECTRICAL] + [(t, 'mechanical') for t in MECHANICAL] +
         [(t, 'both') for t in BOTH])

FILLER = [
    'The course is presented by experienced practitioners from industry.',
    'Delegates receive comprehensive notes and a certificate of attendance.',
    'Worked examples and site case studies reinforce every module.',
    'The programme is suitable for engineers, technologists and senior technicians.',
    'Group exercises encourage discussion of real workplace problems.',
    'Attendance counts toward continuing professional development hours.',
    'Lunch and refreshments are provided on each day of the course.',
    'A short assessment is completed at the end of the final session.',
]


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)


def title_case(term):
    small = {'and', 'for', 'of', 'in', 'on'}
    words = term.split()
    return ' '.join(w if (w in small and i) else (w.upper() if len(w) <= 3 and w.isalpha() and w in {'plc', 'hmi', 'ups', 'mv', 'lv', 'dc', 'iec', 'cad', 'cnc', 'iso', 'fpga', 'ot', 'hvac', 'scada'} else w[:1].upper() + w[1:]) for i, w in enumerate(words))


def plural(term):
    """Plural surface form of a term when the pseudo-matcher maps it back."""
    words = term.split()
    cand = words[-1] + 's'
    if normalize_token(cand.encode()) == normalize_token(words[-1].encode()):
        return ' '.join(words[:-1] + [cand])
    return term


def course_text(rng, keys, incidental):
    k = keys + [keys[0]] * (3 - len(keys))
    sentences = [
        f'This course introduces {k[0]} for practising engineers.',
        f'Participants study {plural(k[0])} in depth, together with {k[1]} and {k[2]}.',
        rng.choice(FILLER),
        f'Practical sessions apply {k[1]} to typical plant situations.',
        rng.choice(FILLER),
    ]
    if len(keys) > 2:
        sentences.append(f'The final module reviews {k[2]} and its interaction with {k[0]}.')
    for t in incidental:
        sentences.append(f'A brief overview of {t} is also included.')
    sentences.append(rng.choice(FILLER))
    return ' '.join(sentences)


def pick_course(rng, pools, used_titles):
    while True:
        disc = rng.choice(['electrical', 'mechanical', 'mechanical', 'electrical', 'both'])
        pool = pools[disc]
        nkeys = rng.choice([2, 3, 3])
        keys = rng.sample(pool, nkeys)
        others = [t for t, _ in VOCAB if t not in keys]
        incidental = rng.sample(others, rng.choice([1, 2]))
        title = f'{title_case(keys[0])} and {title_case(keys[1])}'
        if title not in used_titles:
            used_titles.add(title)
            return title, keys, incidental


def make_tables():
    write(os.path.join(ROOT, 'vocab.tsv'),
          '# id\tterm\tdiscipline\n' +
          ''.join(f'{i}\t{t}\t{d}\n' for i, (t, d) in enumerate(VOCAB, start=1)))
    write(os.path.join(ROOT, 'tables', 'goals.tsv'),
          ''.join(f'{i}\t{g}\n' for i, g in enumerate(GOALS, start=1)))
    write(os.path.join(ROOT, 'tables', 'interests.tsv'),
          ''.join(f'{i}\t{g}\n' for i, g in enumerate(INTERESTS, start=1)))


def pools_by_discipline():
    pools = {'electrical': [], 'mechanical': [], 'both': []}
    for t, d in VOCAB:
        pools[d].append(t)
    mixed = pools['both'] + pools['electrical'][:10] + pools['mechanical'][:10]
    return {'electrical': pools['electrical'] + pools['both'][:6],
            'mechanical': pools['mechanical'] + pools['both'][:6],
            'both': mixed}


def make_docs(subdir, count, seed, labels_file=None):
    rng = random.Random(seed)
    ids = {t: i for i, (t, _) in enumerate(VOCAB, start=1)}
    pools = pools_by_discipline()
    used = set()
    out_dir = os.path.join(ROOT, subdir)
    shutil.rmtree(out_dir, ignore_errors=True)
    label_lines = ['# doc_id\tterm_id\tlabel\n']
    for n in range(1, count + 1):
        title, keys, incidental = pick_course(rng, pools, used)
        doc_id = f'doc{n:02d}'
        write(os.path.join(out_dir, f'{doc_id}.txt'),
              title + '\n' + course_text(rng, keys, incidental) + '\n')
        for t in keys:
            label_lines.append(f'{doc_id}\t{ids[t]}\t1\n')
        for t in incidental:
            label_lines.append(f'{doc_id}\t{ids[t]}\t0\n')
    if labels_file:
        write(os.path.join(ROOT, labels_file), ''.join(label_lines))


# --- provider templates -----------------------------------------------------

def page_a(provider, page_no, courses):
    blocks = []
    for title, desc in courses:
        blocks.append('<div class="course">\n'
                      f'  <h2 class="course-title">{html.escape(title)}</h2>\n'
                      f'  <p class="summary">{desc}</p>\n'
                      '</div>\n')
    return ('<!DOCTYPE html>\n<html>\n<head><meta charset="utf-8"><title>Course list '
            f'{page_no}</title></head>\n<body>\n'
            '<div id="top"><a href="/">Home</a> | <a href="/courses">Courses</a></div>\n'
            f'<div class="org-name">{provider}</div>\n'
            '<div id="sidebar"><h2 class="side">News</h2><p>New venue opening soon.</p></div>\n'
            '<div id="main">\n' + ''.join(blocks) + '</div>\n'
            f'<div id="footer">Copyright {provider}. All rights reserved.</div>\n'
            '</body>\n</html>\n')


def page_b(provider, page_no, courses):
    rows = []
    for i, (title, desc) in enumerate(courses):
        rows.append(f'<tr><td class="title">{html.escape(title)}</td>'
                    f'<td class="org">{provider}</td>'
                    f'<td class="desc">{desc}</td>'
                    f'<td><a href="/register?c={page_no}{i}">Register</a></td></tr>\n')
    return ('<html><head><title>Schedule</title></head><body>\n'
            f'<h1>Training schedule page {page_no}</h1>\n'
            '<table class="schedule">\n'
            '<tr><th>Course</th><th>Provider</th><th>About</th><th></th></tr>\n' + ''.join(rows) +
            '</table>\n<p class="note">Prices exclude VAT.</p>\n</body></html>\n')


def page_c(provider, page_no, courses):
    items = []
    for title, desc in courses:
        items.append(f'<dt>{html.escape(title)}</dt>\n'
                     f'<dd><span class="by">Offered by: {provider}</span><br><em>{desc}</em></dd>\n')
    return ('<html>\n<body>\n'
            f'<div class="banner">Catalogue section {page_no}</div>\n'
            '<dl class="catalogue">\n' + ''.join(items) + '</dl>\n'
            '<dl class="contact"><dt class="k">Phone</dt><dd class="v">011 555 0100</dd></dl>\n'
            '</body>\n</html>\n')


PROVIDERS = [
    ('hatch_academy', 'Hatch Engineering Academy', page_a, 'a'),
    ('thyssen_training', 'ThyssenKrupp Training Centre', page_b, 'b'),
    ('engskills', 'EngSkills Online', page_c, 'c'),
]


def clean(raw):
    text = re.sub(r'<[^>]*>', '', raw)
    text = html.unescape(text)
    return ' '.join(text.split())


def make_corpus():
    rng = random.Random(20090601)
    pools = pools_by_discipline()
    used = set()
    root = os.path.join(ROOT, 'corpus')
    shutil.rmtree(root, ignore_errors=True)
    for dirname, provider, render, style in PROVIDERS:
        manifest = ['# file\turl\n']
        examples = ['# file\tfield\ttarget\n']
        truth = ['# file\ttitle\tprovider\tdescription\n']
        for page_no in range(1, 7):
            courses = []
            for _ in range(rng.choice([2, 3, 4])):
                title, keys, incidental = pick_course(rng, pools, used)
                body = course_text(rng, keys, incidental)
                if style == 'a':
                    first = keys[0]
                    body = body.replace(first, f'<b>{first}</b>', 1)
                elif style == 'b':
                    body = body.replace('. ', ' &amp; more. ', 1)
                courses.append((title, body))
            fname = f'page{page_no}.html'
            write(os.path.join(root, dirname, 'pages', fname), render(provider, page_no, courses))
            manifest.append(f'{fname}\thttps://{dirname.replace("_", "-")}.example/courses/{page_no}\n')
            for title, desc in courses:
                truth.append(f'{fname}\t{title}\t{provider}\t{clean(desc)}\n')
            if page_no <= 2:
                if style == 'a':
                    examples.append(f'{fname}\tprovider\t{provider}\n')
                for title, desc in courses:
                    examples.append(f'{fname}\ttitle\t{html.escape(title)}\n')
                    examples.append(f'{fname}\tdescription\t{desc}\n')
                    if style != 'a':
                        examples.append(f'{fname}\tprovider\t{provider}\n')
        write(os.path.join(root, dirname, 'manifest.tsv'), ''.join(manifest))
        write(os.path.join(root, dirname, 'examples.tsv'), ''.join(examples))
        write(os.path.join(root, dirname, 'ground_truth.tsv'), ''.join(truth))


def main():
    make_tables()
    make_docs('nb/docs', 40, 7, labels_file='nb/labels.tsv')
    make_docs('corpus20', 20, 11)
    make_corpus()


if __name__ == '__main__':
    main()
