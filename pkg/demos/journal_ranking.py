"""
Eigenfactor for three journals
==============================
"""

from distpagerank.cli import fixture_path
from distpagerank.eigenfactor import eigenfactor, read_citation_csvs

data = read_citation_csvs(fixture_path("citations.csv"), fixture_path("articles.csv"))
res = eigenfactor(data)
print(f"{'journal':<10} {'EF':>7} {'AI':>6}")
for i in res.ranking():
    print(f"{data.journals[i]:<10} {res.EF[i]:7.2f} {res.AI[i]:6.3f}")
