#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under crates/core/fixtures.

Output is deterministic; rerunning must leave the files byte-identical.
"""

import csv
import datetime as dt
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def case(case_id, country, city, report_date, *, name=None, village=None, hospital=None,
         status="confirmed", outcome="alive", role="community", tier="official", ref=""):
    return {
        "record": "case",
        "case_id": case_id,
        "city": city,
        "person_name": name,
        "village": village,
        "hospital": hospital,
        "country": country,
        "status": status,
        "outcome": outcome,
        "role": role,
        "report_date": report_date,
        "source_tier": tier,
        "source_ref": ref,
    }


def infection(infector, infectee, context, date=None, evidence=""):
    line = {"record": "infection", "infector": infector, "infectee": infectee, "context": context}
    if date:
        line["date"] = date
    if evidence:
        line["evidence"] = evidence
    return line


def place(country, city=None):
    return {"country": country, "city": city} if city else {"country": country}


def travel(person, origin, destination, reason, date=None, quarantined=False):
    line = {
        "record": "travel",
        "person": person,
        "origin": origin,
        "destination": destination,
        "reason": reason,
        "quarantined_on_arrival": quarantined,
    }
    if date:
        line["date"] = date
    return line


def write_jsonl(name, lines):
    with open(OUT / name, "w", newline="\n") as f:
        for line in lines:
            f.write(json.dumps(line, separators=(",", ":")) + "\n")


def nigeria():
    hospital = "First Consultants Hospital"
    ref = "WHO situation report 2014-10-01; contact of Patrick Sawyer"
    lines = [
        case("NG-01", "Nigeria", "Lagos", "2014-07-22", name="Patrick Sawyer", hospital=hospital,
             status="suspected", outcome="alive", role="traveler", tier="major_news",
             ref="Guardian 2014-08-11, Lagos case report"),
        case("NG-01", "Nigeria", "Lagos", "2014-07-25", name="Patrick Sawyer", hospital=hospital,
             status="confirmed", outcome="dead", role="traveler", tier="official",
             ref="CDC MMWR 2014-10-03"),
    ]
    hcw = {f"NG-{i:02}" for i in range(2, 13)}
    dead = {"NG-02", "NG-03", "NG-04", "NG-06", "NG-14", "NG-18", "NG-19"}
    cities = {"NG-14": "Port Harcourt", "NG-15": "Port Harcourt", "NG-16": "Port Harcourt",
              "NG-17": "Port Harcourt", "NG-18": "Lagos", "NG-19": "Lagos", "NG-20": "Lagos"}
    for i in range(2, 21):
        cid = f"NG-{i:02}"
        role = "healthcare_worker" if cid in hcw else "community"
        lines.append(case(
            cid, "Nigeria", cities.get(cid, "Lagos"), f"2014-08-{min(4 + i, 28):02}",
            hospital=hospital if cid in hcw else None,
            village=None if cid in hcw else cities.get(cid, "Lagos"),
            outcome="dead" if cid in dead else "recovered",
            role=role, ref=ref,
        ))
    for i in range(2, 14):
        lines.append(infection("NG-01", f"NG-{i:02}", "hospital", f"2014-07-{20 + (i % 5)}"))
    lines += [
        infection("NG-05", "NG-14", "hospital", "2014-08-01"),
        infection("NG-14", "NG-15", "hospital", "2014-08-11"),
        infection("NG-14", "NG-16", "family", "2014-08-12"),
        infection("NG-14", "NG-17", "hospital", "2014-08-13"),
        infection("NG-07", "NG-18", "family", "2014-08-05"),
        infection("NG-08", "NG-19", "family", "2014-08-06"),
        infection("NG-08", "NG-20", "family", "2014-08-07"),
    ]
    lines.append(travel("NG-01", place("Liberia", "Monrovia"), place("Nigeria", "Lagos"), "other",
                        "2014-07-20"))
    write_jsonl("nigeria.jsonl", lines)


def us():
    hospital = "Texas Health Presbyterian Hospital"
    lines = [
        case("US-01", "United States", "Dallas", "2014-09-30", name="Thomas Duncan", hospital=hospital,
             outcome="dead", role="traveler", ref="CNN 2014-10-06"),
        case("US-02", "United States", "Dallas", "2014-10-12", hospital=hospital,
             outcome="recovered", role="healthcare_worker", ref="Daily Mail 2014-10-15; nurse of Thomas Duncan"),
        case("US-03", "United States", "Dallas", "2014-10-15", hospital=hospital,
             outcome="recovered", role="healthcare_worker", ref="Daily Mail 2014-10-15; nurse of Thomas Duncan"),
    ]
    evacuees = [
        ("US-04", "Liberia", "Monrovia", "Atlanta", "2014-08-02", "healthcare_worker"),
        ("US-05", "Liberia", "Monrovia", "Atlanta", "2014-08-05", "healthcare_worker"),
        ("US-06", "Liberia", "Monrovia", "Omaha", "2014-09-05", "healthcare_worker"),
        ("US-07", "Guinea", "Conakry", "Atlanta", "2014-09-09", "healthcare_worker"),
        ("US-08", "Sierra Leone", "Freetown", "Omaha", "2014-10-06", "community"),
        ("US-09", "Liberia", "Monrovia", "Atlanta", "2014-09-21", "healthcare_worker"),
    ]
    for cid, origin, origin_city, city, date, role in evacuees:
        lines.append(case(cid, "United States", city, date, hospital=f"{city} isolation unit",
                          outcome="evacuated", role=role, ref="CDC medical evacuation notice"))
    lines += [
        infection("US-01", "US-02", "hospital", "2014-09-28"),
        infection("US-01", "US-03", "hospital", "2014-09-28"),
        travel("US-01", place("Liberia", "Monrovia"), place("United States", "Dallas"), "family_visit",
               "2014-09-20"),
    ]
    for cid, origin, origin_city, city, date, _ in evacuees:
        lines.append(travel(cid, place(origin, origin_city), place("United States", city), "other",
                            date, quarantined=True))
    write_jsonl("us.jsonl", lines)


def west_africa():
    lines = [
        case("WA-01", "Liberia", "Foya", "2014-03-30", village="Foya", outcome="dead", ref="Daily Observer 2014-04-05"),
        case("WA-02", "Liberia", "Foya", "2014-04-05", village="Foya", outcome="dead", ref="Daily Observer 2014-04-05"),
        case("WA-03", "Sierra Leone", "Koindu", "2014-05-20", village="Koindu", outcome="dead", ref="WHO GAR 2014-09-23"),
        case("WA-04", "Sierra Leone", "Koindu", "2014-05-26", village="Koindu", outcome="dead",
             role="traditional_healer", ref="WHO GAR 2014-09-23"),
        case("WA-05", "Sierra Leone", "Kissi Teng", "2014-06-02", village="Kissi Teng", ref="WHO GAR 2014-09-23"),
        case("WA-06", "Senegal", "Dakar", "2014-08-29", hospital="Fann Hospital", outcome="recovered",
             ref="Reuters 2014-09-09"),
        case("WA-07", "Guinea", "Gueckedou", "2014-08-01", village="Gueckedou", outcome="dead", ref="Reuters 2014-09-09"),
        case("WA-08", "Guinea", "Conakry", "2014-08-10", village="Conakry", outcome="dead", ref="Reuters 2014-09-09"),
        case("WA-09", "Guinea", "Conakry", "2014-08-16", village="Conakry", ref="Reuters 2014-09-09"),
        case("WA-10", "Mali", "Kayes", "2014-10-23", hospital="Kayes Hospital", outcome="dead", ref="CNN 2014-10-24"),
        case("WA-11", "Mali", "Kayes", "2014-10-24", hospital="Kayes Hospital", status="suspected",
             outcome="unknown", ref="CNN 2014-10-24"),
        case("WA-12", "Guinea", "Kissidougou", "2014-10-03", village="Kissidougou", outcome="dead",
             ref="WHO 2014-11-10"),
        infection("WA-01", "WA-02", "family", "2014-03-28"),
        infection("WA-03", "WA-04", "traditional_healer", "2014-05-15"),
        infection("WA-04", "WA-05", "funeral", "2014-05-28"),
        infection("WA-07", "WA-08", "family", "2014-08-03"),
        infection("WA-08", "WA-06", "family", "2014-08-12"),
        infection("WA-08", "WA-09", "family", "2014-08-12"),
        infection("WA-12", "WA-10", "family", "2014-10-05"),
        travel("WA-01", place("Guinea"), place("Liberia", "Foya"), "unknown", "2014-03-25"),
        travel("WA-03", place("Guinea"), place("Sierra Leone", "Koindu"), "treatment_seeking", "2014-05-10"),
        travel("WA-07", place("Sierra Leone"), place("Guinea", "Gueckedou"), "treatment_seeking", "2014-07-28"),
        travel("WA-06", place("Guinea", "Conakry"), place("Senegal", "Dakar"), "family_visit", "2014-08-20", True),
        travel("WA-10", place("Guinea", "Kissidougou"), place("Mali", "Kayes"), "orphan_adoption", "2014-10-19", True),
    ]
    write_jsonl("west_africa.jsonl", lines)


def promed_reports():
    start = dt.date(2014, 3, 19)
    days = (dt.date(2014, 10, 15) - start).days
    rows = []
    for i in range(272):
        posted = start + dt.timedelta(days=(i * days) // 271)
        summary = i % 17 == 16
        seq = i + 1
        if summary:
            headline = f"EBOLA VIRUS DISEASE - WEST AFRICA ({seq:02}): WEEKLY SUMMARY OF EARLIER POSTS"
            keywords = "ebola;period_summary"
        else:
            headline = f"EBOLA VIRUS DISEASE - WEST AFRICA ({seq:02}): CASE UPDATE"
            keywords = "ebola"
        rows.append(["promed", "ProMED-mail", headline, posted.isoformat(),
                     f"https://promedmail.org/post/2014{seq:04}", keywords,
                     f"Ebola update number {seq}", "Ebola"])
    assert sum(1 for r in rows if "period_summary" in r[5]) == 16
    # top up summaries to 32 by flagging every ninth non-summary report
    extra = [r for r in rows if "period_summary" not in r[5]][8::15][:16]
    for r in extra:
        r[2] = r[2].replace("CASE UPDATE", "ROUNDUP OF EARLIER POSTS")
        r[5] = "ebola;period_summary"
    assert sum(1 for r in rows if "period_summary" in r[5]) == 32
    with open(OUT / "promed_reports.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["source_medium", "outlet", "headline", "posted_date", "url", "keywords", "post", "subject"])
        w.writerows(rows)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    nigeria()
    us()
    west_africa()
    promed_reports()
