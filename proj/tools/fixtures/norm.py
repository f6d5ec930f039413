import re

def tokenize(text):
    return re.findall(rb'[A-Za-z0-9\x80-\xff]+', text.encode())

def normalize_token(t):
    t = t.decode().lower()
    if len(t) > 4 and t.endswith(('sses', 'xes', 'ches', 'shes', 'zes')):
        return t[:-2]
    if len(t) > 3 and t.endswith('s') and not t.endswith(('ss', 'us', 'is')):
        return t[:-1]
    return t

def normalize_phrase(text):
    return ' '.join(normalize_token(t) for t in tokenize(text))
