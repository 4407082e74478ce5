"""Small text formatting helpers."""


def banner(title):
    return "== " + title.upper() + " =="


def bullet(text):
    return "- " + text
