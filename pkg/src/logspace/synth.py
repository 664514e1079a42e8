"""Synthetic Windows process-creation corpora.

Two generators, both emitting nested raw documents shaped like security
EventID 4688 records (plus some non-process events that carry no schema key):

* :func:`detection_corpus` - ambient host streams, some of which contain one
  instance of a ransomware-like process sequence whose dropped file names are
  random per instance (polymorphism).
* :func:`roles_corpus` - daily streams for hosts of three user roles, with
  role- and host-specific process mixes and periodic background jobs.
"""
from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass

import numpy as np

from .ingest import parse_time

EVENT_KEY = "Event"
TIME_KEY = "Event.System.TimeCreated.SystemTime"
HOST_KEY = "Event.System.Computer"
NEWPROC_KEY = "Event.EventData.NewProcessName"
PARENT_KEY = "Event.EventData.ParentProcessName"
ELEVATION_KEY = "Event.EventData.TokenElevationType"
CMD_KEY = "Event.EventData.CommandLine"

SYS32 = "C:\\Windows\\System32\\"
WOW64 = "C:\\Windows\\SysWOW64\\"
PROGS = "C:\\Program Files (x86)\\"


def schema_config(include_cmdline: bool = True) -> dict:
    """Schema document for the generated corpora (unfitted)."""
    attrs = [
        {"name": "BaseFileName", "domain": "categorical", "source_key": NEWPROC_KEY,
         "derivation": "basename"},
        {"name": "BaseFileExtn", "domain": "categorical", "source_key": NEWPROC_KEY,
         "derivation": "extension"},
        {"name": "CreatorProc", "domain": "categorical", "source_key": PARENT_KEY,
         "derivation": "basename"},
        {"name": "TokenElevation", "domain": "numerical", "source_key": ELEVATION_KEY},
    ]
    if include_cmdline:
        attrs.append({"name": "CmdLine", "domain": "string", "source_key": CMD_KEY})
    return {"time_key": TIME_KEY, "host_key": HOST_KEY, "attributes": attrs}


@dataclass(frozen=True)
class Template:
    new_proc: str
    parent: str
    elevation: int
    cmd: str | None  # may use {host}, {n}, {hex}; None means no CommandLine key


AMBIENT = [
    Template(SYS32 + "svchost.exe", SYS32 + "services.exe", 1, SYS32 + "svchost.exe -k netsvcs"),
    Template(SYS32 + "svchost.exe", SYS32 + "services.exe", 1, SYS32 + "svchost.exe -k LocalService"),
    Template(SYS32 + "conhost.exe", SYS32 + "cmd.exe", 1, "\\??\\C:\\Windows\\system32\\conhost.exe 0x{hex}"),
    Template(SYS32 + "taskhost.exe", SYS32 + "services.exe", 1, "taskhost.exe $(Arg0)"),
    Template(SYS32 + "SearchProtocolHost.exe", SYS32 + "SearchIndexer.exe", 1,
             SYS32 + "SearchProtocolHost.exe Global\\UsGthrFltPipeMssGthrPipe{n} 1"),
    Template(SYS32 + "SearchFilterHost.exe", SYS32 + "SearchIndexer.exe", 1,
             SYS32 + "SearchFilterHost.exe 0 {n} 524 532 {{{hex}}}"),
    Template(PROGS + "Google\\Chrome\\Application\\chrome.exe", "C:\\Windows\\explorer.exe", 3,
             "\"" + PROGS + "Google\\Chrome\\Application\\chrome.exe\""),
    Template(PROGS + "Google\\Chrome\\Application\\chrome.exe",
             PROGS + "Google\\Chrome\\Application\\chrome.exe", 3,
             "chrome.exe --type=renderer --field-trial-handle={n} --lang=en-US"),
    Template(PROGS + "Google\\Update\\GoogleUpdate.exe", SYS32 + "svchost.exe", 2,
             "\"" + PROGS + "Google\\Update\\GoogleUpdate.exe\" /ua /installsource scheduler"),
    Template(SYS32 + "wbem\\WmiPrvSE.exe", SYS32 + "svchost.exe", 1,
             SYS32 + "wbem\\wmiprvse.exe -secured -Embedding"),
    Template(SYS32 + "dllhost.exe", SYS32 + "svchost.exe", 3,
             SYS32 + "DllHost.exe /Processid:{{{hex}}}"),
    Template(SYS32 + "consent.exe", SYS32 + "svchost.exe", 1, "consent.exe {n} 288 000000000{hex}"),
    Template(SYS32 + "WindowsPowerShell\\v1.0\\powershell.exe", SYS32 + "wbem\\WmiPrvSE.exe", 1,
             "powershell.exe -NoProfile -NonInteractive -Command Get-Service"),
    Template(SYS32 + "cmd.exe", "C:\\Windows\\explorer.exe", 3, SYS32 + "cmd.exe"),
    Template(SYS32 + "notepad.exe", "C:\\Windows\\explorer.exe", 3,
             SYS32 + "notepad.exe C:\\Users\\{host}\\Documents\\notes{n}.txt"),
    Template("C:\\Windows\\explorer.exe", SYS32 + "userinit.exe", 3, "C:\\Windows\\explorer.exe"),
    Template("C:\\Windows\\explorer.exe", "C:\\Windows\\explorer.exe", 3,
             "C:\\Windows\\Explorer.exe /factory,{{{hex}}}"),
    Template(PROGS + "Microsoft Office\\Office15\\OUTLOOK.EXE", "C:\\Windows\\explorer.exe", 3,
             "\"" + PROGS + "Microsoft Office\\Office15\\OUTLOOK.EXE\""),
    Template(PROGS + "Microsoft Office\\Office15\\WINWORD.EXE", "C:\\Windows\\explorer.exe", 3,
             "\"" + PROGS + "Microsoft Office\\Office15\\WINWORD.EXE\" /n C:\\Users\\{host}\\report{n}.docx"),
    Template(PROGS + "Microsoft Office\\Office15\\EXCEL.EXE", "C:\\Windows\\explorer.exe", 3,
             "\"" + PROGS + "Microsoft Office\\Office15\\EXCEL.EXE\" C:\\Users\\{host}\\data{n}.xlsx"),
    Template(SYS32 + "mmc.exe", "C:\\Windows\\explorer.exe", 2, SYS32 + "mmc.exe compmgmt.msc"),
    Template(SYS32 + "mstsc.exe", "C:\\Windows\\explorer.exe", 3, SYS32 + "mstsc.exe /v:srv{n}"),
    Template(SYS32 + "PING.EXE", SYS32 + "cmd.exe", 3, "ping -n 4 10.0.{n}.1"),
    Template(PROGS + "Adobe\\Reader 11.0\\Reader\\AcroRd32.exe", "C:\\Windows\\explorer.exe", 3,
             "\"" + PROGS + "Adobe\\Reader 11.0\\Reader\\AcroRd32.exe\" C:\\Users\\{host}\\paper{n}.pdf"),
    Template(PROGS + "Adobe\\Reader 11.0\\Reader\\AcroCEF\\AcroCEF.exe",
             PROGS + "Adobe\\Reader 11.0\\Reader\\AcroRd32.exe", 3, "AcroCEF.exe --type=renderer {n}"),
    Template("C:\\Python27\\python.exe", SYS32 + "cmd.exe", 3, "python.exe C:\\Users\\{host}\\run{n}.py"),
    Template(PROGS + "MATLAB\\R2015a\\bin\\matlab.exe", "C:\\Windows\\explorer.exe", 3,
             "\"" + PROGS + "MATLAB\\R2015a\\bin\\matlab.exe\""),
    Template(SYS32 + "policyHost.exe", SYS32 + "svchost.exe", 1, SYS32 + "policyhost.exe -Embedding"),
    Template("C:\\Windows\\Microsoft.NET\\Framework64\\v4.0.30319\\csc.exe",
             SYS32 + "WindowsPowerShell\\v1.0\\powershell.exe", 1,
             "csc.exe /noconfig /fullpaths @C:\\Windows\\TEMP\\{hex}.cmdline"),
    Template("C:\\Windows\\Microsoft.NET\\Framework64\\v4.0.30319\\cvtres.exe",
             "C:\\Windows\\Microsoft.NET\\Framework64\\v4.0.30319\\csc.exe", 1,
             "cvtres.exe /NOLOGO /READONLY /MACHINE:IX86 /OUT:C:\\Windows\\TEMP\\RES{hex}.tmp"),
    Template("C:\\Windows\\Microsoft.NET\\Framework64\\v4.0.30319\\ngen.exe",
             "C:\\Windows\\Microsoft.NET\\Framework64\\v4.0.30319\\ngentask.exe", 1,
             "ngen.exe install System.Web.{n} /NoDependencies /queue:1"),
    Template(PROGS + "Mozilla Firefox\\firefox.exe", "C:\\Windows\\explorer.exe", 3,
             "\"" + PROGS + "Mozilla Firefox\\firefox.exe\""),
]

FLASH = Template(SYS32 + "Macromed\\Flash\\FlashUtil64_19_0_0_185_ActiveX.exe", SYS32 + "svchost.exe", 3,
                 "C:\\Windows\\system32\\Macromed\\Flash\\FlashUtil64_19_0_0_185_ActiveX.exe -Embedding")

# periodic background jobs for the roles corpus: name -> sequence of templates
POLICY_HOST = [27, 12, 28, 29, 28, 29, 2]
NGEN_JOB = [30, 30, 30, 30, 30, 30, 30]


def attack_sequence(host: str, rng) -> list[Template]:
    """Seven process launches of a dropper that deletes shadow copies.

    The dropped file names are random hex per instance."""
    dropped = f"{rng.integers(0x100, 0x10000):X}"
    second = f"{rng.integers(0x100000, 0x1000000):x}"
    tmp = f"C:\\Users\\{host}\\AppData\\Local\\Temp\\Low\\{dropped}.tmp"
    roaming = f"C:\\Users\\{host}\\AppData\\Roaming\\{second}.exe"
    return [
        FLASH,
        Template(tmp, PROGS + "Internet Explorer\\iexplore.exe", 3, tmp),
        Template(WOW64 + "explorer.exe", tmp, 3, None),
        Template(WOW64 + "svchost.exe", WOW64 + "explorer.exe", 3, WOW64 + "svchost.exe -k netsvcs"),
        Template(SYS32 + "vssadmin.exe", tmp, 2, "vssadmin.exe Delete Shadows /All /Quiet"),
        Template(roaming, WOW64 + "explorer.exe", 3, roaming),
        Template(SYS32 + "cmd.exe", roaming, 2,
                 "cmd.exe /c bcdedit /set {{default}} recoveryenabled No"),
    ]


def _iso(t: float) -> str:
    return _dt.datetime.fromtimestamp(t, _dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _process_doc(tpl: Template, host: str, t: float, rng) -> dict:
    data = {
        "SubjectUserName": host.upper() + "$",
        "NewProcessName": tpl.new_proc,
        "ParentProcessName": tpl.parent,
        "TokenElevationType": tpl.elevation,
    }
    if tpl.cmd is not None:
        data["CommandLine"] = tpl.cmd.format(
            host=host, n=int(rng.integers(1, 1000)), hex=f"{rng.integers(0, 2**32):08x}")
    return {EVENT_KEY: {
        "System": {"EventID": 4688, "Channel": "Security", "Computer": host,
                   "TimeCreated": {"SystemTime": _iso(t)}},
        "EventData": data,
    }}


def _other_doc(host: str, t: float, rng) -> dict:
    event = int(rng.choice([4624, 4634, 5156, 4672]))
    return {EVENT_KEY: {
        "System": {"EventID": event, "Channel": "Security", "Computer": host,
                   "TimeCreated": {"SystemTime": _iso(t)}},
        "EventData": {"LogonType": int(rng.integers(2, 12)), "IpPort": int(rng.integers(0, 65536))},
    }}


def _ambient_weights(rng, alpha: float = 0.4) -> np.ndarray:
    return rng.dirichlet(np.full(len(AMBIENT), alpha))


def _ambient_stream(host, t0, n, weights, rng, other_rate, flash_rate=0.002):
    docs = []
    t = t0
    for _ in range(n):
        t += float(rng.exponential(30.0))
        if rng.random() < other_rate:
            docs.append(_other_doc(host, t, rng))
        elif rng.random() < flash_rate:
            docs.append(_process_doc(FLASH, host, t, rng))
        else:
            tpl = AMBIENT[int(rng.choice(len(AMBIENT), p=weights))]
            docs.append(_process_doc(tpl, host, t, rng))
    return docs, t


def detection_corpus(seed: int = 0, n_attack: int = 4, n_ambient: int = 3,
                     length: int = 2600, other_rate: float = 0.16):
    """Raw documents for attack and ambient hosts, plus ground truth.

    Each attack host's stream has ambient activity with one attack sequence
    spliced in somewhere in its middle third. The last ambient host reuses
    the process mix of the last attack host, one day earlier.
    Returns ``(documents, truth)``; ``truth["attacks"]`` lists host and
    attack time span.
    """
    rng = np.random.default_rng(seed)
    start = _dt.datetime(2015, 11, 3, tzinfo=_dt.timezone.utc).timestamp()
    docs, attacks, ambient_hosts = [], [], []
    profiles = {}
    for i in range(n_attack):
        host = f"ws{i + 1:02d}"
        profiles[host] = _ambient_weights(rng)
        before = int(rng.integers(length // 3, 2 * length // 3))
        head, t = _ambient_stream(host, start, before, profiles[host], rng, other_rate)
        seq_start = t + float(rng.exponential(30.0))
        t = seq_start
        for j, tpl in enumerate(attack_sequence(host, rng)):
            if j:
                t += float(rng.uniform(5.0, 7.0))
            head.append(_process_doc(tpl, host, t, rng))
        attacks.append({"host": host, "t_start": parse_time(_iso(seq_start)),
                        "t_end": parse_time(_iso(t)), "length": 7})
        tail, _ = _ambient_stream(host, t, length - before, profiles[host], rng, other_rate)
        docs.extend(head + tail)
    for i in range(n_ambient):
        host = f"ws{n_attack + i + 1:02d}"
        if i == n_ambient - 1 and n_attack:
            weights = profiles[f"ws{n_attack:02d}"]
            t0 = start - 86400.0
        else:
            weights = _ambient_weights(rng)
            t0 = start
        stream, _ = _ambient_stream(host, t0, length, weights, rng, other_rate)
        docs.extend(stream)
        ambient_hosts.append(host)
    return docs, {"attacks": attacks, "ambient_hosts": ambient_hosts}


ROLE_POOLS = {
    "admin": [12, 13, 20, 3, 9, 10, 17],
    "it": [21, 22, 18, 19],
    "researcher": [6, 7, 23, 24, 25, 26, 31, 14],
}
BACKGROUND = [0, 1, 2, 4, 5, 8, 11, 15, 16]


def roles_corpus(seed: int = 0, days=(10, 9, 8, 9, 8, 9, 8), logs_per_day: int = 300,
                 roles=("admin", "admin", "admin", "it", "researcher", "researcher", "researcher"),
                 policy_hours=(2, 8, 14, 20), other_rate: float = 0.1):
    """Daily streams for hosts with user roles.

    Each host mixes a shared background pool, its role's pool (with
    host-specific emphasis) and a few host-private habits. A policy-host job
    runs at ``policy_hours`` on every host except the second, which runs it
    only at 10:00; a .NET precompile job runs at the first morning log-in.
    Returns ``(documents, truth)`` with ``truth["roles"]`` mapping host to
    role.
    """
    rng = np.random.default_rng(seed)
    start = _dt.datetime(2015, 11, 2, tzinfo=_dt.timezone.utc).timestamp()
    docs = []
    role_of = {}
    for h, (n_days, role) in enumerate(zip(days, roles)):
        host = f"ws{h + 1:02d}"
        role_of[host] = role
        weights = np.zeros(len(AMBIENT))
        weights[BACKGROUND] += 0.3 * rng.dirichlet(np.full(len(BACKGROUND), 2.0))
        pool = ROLE_POOLS[role]
        weights[pool] += 0.55 * rng.dirichlet(np.full(len(pool), 3.0))
        private = rng.choice(len(AMBIENT), size=3, replace=False)
        weights[private] += 0.15 * rng.dirichlet(np.full(3, 1.0))
        hours = (10,) if h == 1 else policy_hours
        for day in range(n_days):
            day0 = start + 86400.0 * day
            daily = rng.dirichlet(weights * 400.0 + 1e-3)
            for _ in range(logs_per_day):
                # activity concentrated in working hours
                hour = rng.normal(12.5, 3.0) if rng.random() < 0.8 else rng.uniform(0, 24)
                t = day0 + 3600.0 * float(np.clip(hour, 0.0, 23.999))
                if rng.random() < other_rate:
                    docs.append(_other_doc(host, t, rng))
                    continue
                tpl = AMBIENT[int(rng.choice(len(AMBIENT), p=daily))]
                docs.append(_process_doc(tpl, host, t, rng))
            for hr in hours:
                t = day0 + 3600.0 * hr + float(rng.uniform(0, 600))
                for idx in POLICY_HOST:
                    t += float(rng.uniform(1.0, 4.0))
                    docs.append(_process_doc(AMBIENT[idx], host, t, rng))
            t = day0 + 3600.0 * 8 + float(rng.uniform(0, 900))
            for idx in NGEN_JOB:
                t += float(rng.uniform(5.0, 20.0))
                docs.append(_process_doc(AMBIENT[idx], host, t, rng))
    return docs, {"roles": role_of}
