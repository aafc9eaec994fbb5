#!/usr/bin/env python3
"""Regenerates the pinned test fixtures under tests/data/.

Everything here is synthetic: a small ATT&CK-shaped STIX bundle, a matching
CAPEC bundle, a 1,000-sample labeled corpus, a TRAM-style export and six
whole-document fixtures. Output is byte-stable for a given script version.

    python3 tools/fixtures/make_fixtures.py tests/data
"""

import csv
import io
import json
import random
import sys
import uuid
from pathlib import Path

NS = uuid.UUID("6ba7b811-9dad-11d1-80b4-00c04fd430c8")


def sid(kind, key):
    return f"{kind}--{uuid.uuid5(NS, kind + ':' + key)}"


# id, name, tactics, key phrases (the learnable signal for each class)
TECHNIQUES = [
    ("T1003", "OS Credential Dumping", ["credential-access"],
     ["dumped credentials from the LSASS process memory", "used Mimikatz to harvest password hashes",
      "extracted the NTDS.dit database to obtain domain hashes", "dumped the SAM registry hive to recover credentials"]),
    ("T1005", "Data from Local System", ["collection"],
     ["collected documents from the local file system", "searched local drives for sensitive files to collect",
      "gathered data stored on the infected host"]),
    ("T1012", "Query Registry", ["discovery"],
     ["queried the registry to enumerate installed software", "reads registry values to learn the host configuration",
      "used reg query to inspect registry keys"]),
    ("T1016", "System Network Configuration Discovery", ["discovery"],
     ["ran ipconfig to collect network adapter settings", "enumerated the network configuration of the victim",
      "gathered IP addresses and DNS settings of the host"]),
    ("T1018", "Remote System Discovery", ["discovery"],
     ["used net view to list remote systems on the network", "scanned the domain to identify other reachable hosts",
      "used AdFind to enumerate computers in Active Directory"]),
    ("T1020", "Automated Exfiltration", ["exfiltration"],
     ["automatically exfiltrated collected files at scheduled intervals", "uploads stolen data without operator interaction",
      "runs a routine that automatically sends harvested files out"]),
    ("T1021", "Remote Services", ["lateral-movement"],
     ["moved laterally using Remote Desktop Protocol sessions", "logged into other servers over RDP with stolen accounts",
      "used SMB administrative shares to reach remote hosts"]),
    ("T1027", "Obfuscated Files or Information", ["defense-evasion"],
     ["encrypted its payload with a custom XOR routine to hinder analysis", "packed the binary to obfuscate its code",
      "base64 encoded strings to hide the configuration"]),
    ("T1036", "Masquerading", ["defense-evasion"],
     ["named its executable svchost.exe to blend in", "disguised the malware as a legitimate Windows binary",
      "renamed tools to mimic trusted system utilities"]),
    ("T1041", "Exfiltration Over C2 Channel", ["exfiltration"],
     ["exfiltrated stolen data over its command and control channel", "sends collected files back to the C2 server",
      "transfers harvested data through the existing C2 connection"]),
    ("T1046", "Network Service Discovery", ["discovery"],
     ["scanned internal ranges for open ports and services", "used a port scanner to find listening services",
      "probed hosts to discover running network services"]),
    ("T1047", "Windows Management Instrumentation", ["execution"],
     ["used WMI to execute commands on remote hosts", "invoked wmic process call create to launch payloads",
      "leveraged Windows Management Instrumentation for execution"]),
    ("T1048", "Exfiltration Over Alternative Protocol", ["exfiltration"],
     ["exfiltrated data over DNS tunneling", "sent archives out over FTP instead of the C2 channel",
      "transferred stolen files via SSH to an external server"]),
    ("T1053", "Scheduled Task/Job", ["execution", "persistence", "privilege-escalation"],
     ["created a scheduled task to run the payload at logon", "used schtasks to maintain execution every hour",
      "registered a cron job to relaunch the implant"]),
    ("T1055", "Process Injection", ["defense-evasion", "privilege-escalation"],
     ["injected malicious code into the memory of explorer.exe", "used process hollowing to run inside a legitimate process",
      "injects its DLL into running processes"]),
    ("T1056", "Input Capture", ["collection", "credential-access"],
     ["installed a keylogger to record keystrokes", "captured user keystrokes to steal passwords",
      "hooks keyboard input to log typed credentials"]),
    ("T1057", "Process Discovery", ["discovery"],
     ["listed running processes with tasklist", "enumerates processes to detect security tools",
      "collected the list of active processes on the host"]),
    ("T1059", "Command and Scripting Interpreter", ["execution"],
     ["executed PowerShell scripts to download additional tools", "used cmd.exe to run batch commands",
      "ran encoded PowerShell commands on the victim", "launched a Python script interpreter to execute code",
      "used the Windows command shell to execute instructions"]),
    ("T1069", "Permission Groups Discovery", ["discovery"],
     ["enumerated domain admin group membership", "used net group to list privileged groups",
      "queried local administrator group members"]),
    ("T1070", "Indicator Removal", ["defense-evasion"],
     ["deleted its files after execution to remove traces", "cleared Windows event logs to cover its tracks",
      "removed artifacts from disk to hinder forensics"]),
    ("T1071", "Application Layer Protocol", ["command-and-control"],
     ["communicates with its C2 server over HTTP", "uses HTTPS web traffic for command and control",
      "beacons to the controller using standard web protocols"]),
    ("T1074", "Data Staged", ["collection"],
     ["staged collected files in a temporary directory before exfiltration", "copied harvested data to a staging folder",
      "aggregated stolen files in a hidden directory"]),
    ("T1078", "Valid Accounts", ["defense-evasion", "persistence", "privilege-escalation", "initial-access"],
     ["used stolen legitimate credentials to access the network", "logged in with compromised valid accounts",
      "abused existing user accounts to gain access"]),
    ("T1082", "System Information Discovery", ["discovery"],
     ["collected the operating system version and hostname", "gathers system information such as architecture and OS build",
      "ran systeminfo to fingerprint the host"]),
    ("T1083", "File and Directory Discovery", ["discovery"],
     ["enumerated files and directories on the system", "searched for documents with specific extensions",
      "listed directory contents to find files of interest"]),
    ("T1087", "Account Discovery", ["discovery"],
     ["enumerated local and domain user accounts", "used net user to list accounts",
      "attempts to discover accounts on the system"]),
    ("T1090", "Proxy", ["command-and-control"],
     ["routed its traffic through a chain of proxies", "used compromised hosts as proxies to relay C2 traffic",
      "set up a SOCKS proxy to hide the controller"]),
    ("T1098", "Account Manipulation", ["persistence", "privilege-escalation"],
     ["added its own account to the administrators group", "modified account permissions to retain access",
      "reset passwords of existing accounts to keep control"]),
    ("T1102", "Web Service", ["command-and-control"],
     ["used legitimate web services like GitHub and forums for C2", "retrieves commands from posts on a public blog",
      "abuses cloud storage services to relay commands"]),
    ("T1105", "Ingress Tool Transfer", ["command-and-control"],
     ["downloaded additional tools onto the compromised host", "transferred further payloads from the attacker server",
      "fetches secondary malware from a remote URL"]),
    ("T1112", "Modify Registry", ["defense-evasion"],
     ["modified registry keys to store its configuration", "changed registry values to weaken security settings",
      "creates registry entries to hide settings"]),
    ("T1113", "Screen Capture", ["collection"],
     ["took screenshots of the victim desktop", "captures the screen at regular intervals",
      "recorded screen images of user activity"]),
    ("T1119", "Automated Collection", ["collection"],
     ["automatically collected files matching specific extensions", "runs a script that gathers documents without interaction",
      "automatically harvests data from predefined paths"]),
    ("T1133", "External Remote Services", ["persistence", "initial-access"],
     ["accessed the network through the corporate VPN", "used exposed remote access services to enter the environment",
      "logged in via Citrix remote gateways"]),
    ("T1134", "Access Token Manipulation", ["defense-evasion", "privilege-escalation"],
     ["adjusted token privileges to escalate", "duplicated access tokens to impersonate users",
      "used token impersonation to run as SYSTEM"]),
    ("T1140", "Deobfuscate/Decode Files or Information", ["defense-evasion"],
     ["decoded its payload at runtime before execution", "decrypted embedded strings using a rolling XOR key",
      "decompressed and decoded the second stage"]),
    ("T1190", "Exploit Public-Facing Application", ["initial-access"],
     ["exploited a vulnerability in an internet-facing web server", "gained access by exploiting a public web application",
      "used a SQL injection flaw on an exposed site"]),
    ("T1204", "User Execution", ["execution"],
     ["relied on users opening a malicious attachment", "lured victims into running a malicious file",
      "tricked the user into enabling macros"]),
    ("T1210", "Exploitation of Remote Services", ["lateral-movement"],
     ["exploited the SMB vulnerability to spread to other hosts", "used EternalBlue to move laterally",
      "exploited remote services on internal servers"]),
    ("T1486", "Data Encrypted for Impact", ["impact"],
     ["encrypted files on the victim systems and demanded a ransom", "deployed ransomware that encrypts network shares",
      "encrypts user data to disrupt operations"]),
    ("T1490", "Inhibit System Recovery", ["impact"],
     ["deleted volume shadow copies to prevent recovery", "used vssadmin to remove backups",
      "disabled Windows recovery features"]),
    ("T1538", "Cloud Service Dashboard", ["discovery"],
     ["used the cloud management console to view resources", "browsed the cloud dashboard with stolen credentials"]),
    ("T1547", "Boot or Logon Autostart Execution", ["persistence", "privilege-escalation"],
     ["added a Run key entry to launch at startup", "placed a shortcut in the startup folder for persistence",
      "configured autostart execution at user logon"]),
    ("T1552", "Unsecured Credentials", ["credential-access"],
     ["searched files for plaintext passwords", "harvested credentials stored in configuration files",
      "looked for SSH keys and cloud tokens on disk"]),
    ("T1560", "Archive Collected Data", ["collection"],
     ["compressed stolen files into password protected RAR archives", "used 7-Zip to archive collected data",
      "packaged harvested documents into ZIP files"]),
    ("T1562", "Impair Defenses", ["defense-evasion"],
     ["disabled antivirus software on the host", "turned off Windows Defender real time monitoring",
      "stopped security services to evade detection"]),
    ("T1566", "Phishing", ["initial-access"],
     ["sent spearphishing emails with malicious attachments", "delivered phishing messages containing links",
      "targeted employees with tailored phishing lures"]),
    ("T1569", "System Services", ["execution"],
     ["created a Windows service to execute the payload", "used PsExec to run commands as a service",
      "executed binaries through the service control manager"]),
    ("T1570", "Lateral Tool Transfer", ["lateral-movement"],
     ["copied tools to other hosts over SMB shares", "transferred the payload between internal systems",
      "pushed malware to remote machines on the network"]),
    ("T1573", "Encrypted Channel", ["command-and-control"],
     ["encrypted C2 traffic with AES", "used a custom encryption protocol for command and control",
      "wraps its C2 communications in RC4 encryption"]),
]

SUBTECHNIQUES = [
    ("T1003.001", "LSASS Memory"), ("T1003.003", "NTDS"), ("T1021.001", "Remote Desktop Protocol"),
    ("T1048.002", "Exfiltration Over Asymmetric Encrypted Non-C2 Protocol"), ("T1053.005", "Scheduled Task"),
    ("T1056.001", "Keylogging"), ("T1059.001", "PowerShell"), ("T1059.003", "Windows Command Shell"),
    ("T1070.004", "File Deletion"), ("T1071.001", "Web Protocols"), ("T1087.002", "Domain Account"),
    ("T1102.002", "Bidirectional Communication"), ("T1204.002", "Malicious File"),
    ("T1547.001", "Registry Run Keys / Startup Folder"), ("T1547.014", "Active Setup"),
    ("T1552.001", "Credentials In Files"), ("T1560.001", "Archive via Utility"),
    ("T1562.001", "Disable or Modify Tools"), ("T1566.001", "Spearphishing Attachment"),
    ("T1569.002", "Service Execution"),
]

CAPEC = {
    "T1134": ["CAPEC-633"], "T1112": ["CAPEC-203"], "T1036": ["CAPEC-177"], "T1055": ["CAPEC-640"],
    "T1021": ["CAPEC-555"], "T1210": ["CAPEC-555"], "T1190": ["CAPEC-9999"], "T1003.001": ["CAPEC-568"],
}
CAPEC_TEXT = {
    "CAPEC-633": ("Token Impersonation", "An adversary exploits a weakness in authentication to create an access token that impersonates a different entity. (Citation: CAPEC)"),
    "CAPEC-203": ("Manipulate Registry Information", "An adversary exploits a weakness in authorization to modify content within a registry. See https://capec.mitre.org/data/definitions/203.html for details."),
    "CAPEC-177": ("Create files with the same name as files protected with a higher classification", "An attacker exploits file location algorithms in an operating system or application by creating a file with the same name as a protected or privileged file."),
    "CAPEC-640": ("Inclusion of Code in Existing Process", "The adversary takes advantage of a bug in an application failing to verify the integrity of the running process to execute arbitrary code in the address space of a separate live process."),
    "CAPEC-555": ("Remote Services with Stolen Credentials", "This pattern of attack involves an adversary that uses stolen credentials to leverage remote services such as RDP, telnet, SSH, and VNC to log into a system."),
    "CAPEC-568": ("Capture Credentials via Keylogger", "An adversary adds a keylogger to a system to capture credentials."),
    "CAPEC-1": ("Accessing Functionality Not Properly Constrained by ACLs", "In applications, particularly web applications, access to functionality is mitigated by an authorization framework."),
}

# Relationship descriptions that exercise the labeling rules (sub-technique -> parent, cleaning).
SEED_RELATIONSHIPS = [
    ("malware", "Hydraq", "T1134", "[Hydraq](https://attack.mitre.org/software/S0203) creates a backdoor through which remote attackers can adjust token privileges.(Citation: Symantec Hydraq Jan 2010)"),
    ("malware", "XCSSET", "T1087", "[XCSSET](https://attack.mitre.org/software/S0658) attempts to discover accounts from various locations such as a user's Evernote, AppleID, Telegram, Skype, and WeChat data.(Citation: trendmicro xcsset xcode project 2020)"),
    ("malware", "PoisonIvy", "T1547.014", "[PoisonIvy](https://attack.mitre.org/software/S0012) creates a Registry key in the Active Setup pointing to a malicious executable.(Citation: Microsoft PoisonIvy 2017)"),
    ("malware", "BADNEWS", "T1102.002", "[BADNEWS](https://attack.mitre.org/software/S0128) can use multiple C2 channels, including RSS feeds, Github, forums, and blogs. It also uses HTTP to receive tasking.(Citation: Forcepoint Monsoon)"),
    ("malware", "Hildegard", "T1552.001", "[Hildegard](https://attack.mitre.org/software/S0601) has searched for SSH keys, Docker credentials, and Kubernetes service tokens.(Citation: Unit 42 Hildegard Malware)"),
    ("malware", "Kobalos", "T1074", "[Kobalos](https://attack.mitre.org/software/S0641) can write captured SSH connection credentials to a file under the /var/run directory with a .pid extension for exfiltration.(Citation: ESET Kobalos Jan 2021)"),
    ("malware", "TEARDROP", "T1140", "[TEARDROP](https://attack.mitre.org/software/S0560) was decoded using a custom rolling XOR algorithm to execute a customized Cobalt Strike payload.(Citation: FireEye SUNBURST Backdoor December 2020)"),
    ("intrusion-set", "APT29", "T1048.002", "[APT29](https://attack.mitre.org/groups/G0016) has exfiltrated collected data over a simple HTTPS request to a password-protected archive staged on a victim's OWA servers.(Citation: Volexity SolarWinds)"),
    ("intrusion-set", "FIN6", "T1003.003", "[FIN6](https://attack.mitre.org/groups/G0037) has used Metasploit's PsExec NTDSGRAB module to obtain a copy of the victim's Active Directory database.(Citation: FireEye FIN6 April 2016)"),
    ("intrusion-set", "FIN6", "T1560.001", "Following data collection, [FIN6](https://attack.mitre.org/groups/G0037) has compressed log files into a ZIP archive prior to staging and exfiltration. (Citation: FireEye FIN6 April 2016)"),
    ("intrusion-set", "FIN6", "T1087.002", "[FIN6](https://attack.mitre.org/groups/G0037) has used Metasploit's PsExec NTDSGRAB module. It then used <code>AdFind</code> to enumerate domain accounts. Results were staged on disk."),
    ("intrusion-set", "FIN6", "T1086", "This relationship targets a revoked technique and must be skipped."),
    ("intrusion-set", "FIN6", "T1059.001", ""),
]

ACTORS = ["Kestrel", "BLACKREED", "Group Ember", "SLATEFOX", "the actor", "the group", "the operators",
          "Tidewater", "COPPERVINE", "the malware", "the implant", "NIGHTLOOM", "Group Marrow", "the backdoor"]
LEADS = ["", "", "", "During the intrusion, ", "In several cases, ", "Later, ", "After initial access, ",
         "In one incident, ", "Analysts observed that ", "Once on the network, "]
TAILS = ["", "", "", " on compromised hosts", " across the environment", " to support later stages",
         " in the victim environment", " within hours", " using custom tooling"]
FILLER = [
    "The company operates retail stores across several countries.",
    "This report summarizes our findings from the investigation.",
    "The activity was first observed in the spring.",
    "We thank our partners for their assistance.",
    "Victims included organizations in the hospitality sector.",
    "The campaign appears to be financially motivated.",
    "Indicators are listed in the appendix.",
    "Our team responded to the incident over several weeks.",
    "The group has been active since at least 2015.",
    "Organizations should review the recommendations below.",
    "The timeline of events is described in the next section.",
    "Attribution remains uncertain at this time.",
    "Healthcare providers were among the most affected.",
    "Law enforcement was notified of the breach.",
    "The following sections describe the tools in detail.",
]


def sentence(rng, tid, phrases, siblings):
    phrase = rng.choice(phrases)
    # Occasionally borrow vocabulary from a same-tactic sibling to make classes overlap.
    if siblings and rng.random() < 0.2:
        other = rng.choice(siblings)
        phrase = phrase + " and " + rng.choice(other)
    lead = rng.choice(LEADS)
    actor = rng.choice(ACTORS)
    if lead.endswith(", ") or lead == "":
        subject = actor if lead else actor[0].upper() + actor[1:]
    else:
        subject = actor
    text = f"{lead}{subject} {phrase}{rng.choice(TAILS)}."
    return text[0].upper() + text[1:]


def siblings_of(tid):
    by_id = {t[0]: t for t in TECHNIQUES}
    tactics = set(by_id[tid][2])
    return [t[3] for t in TECHNIQUES if t[0] != tid and tactics & set(t[2])]


def class_counts(total, rng):
    ids = [t[0] for t in TECHNIQUES]
    order = ["T1059"] + [i for i in ids if i not in ("T1059", "T1538")]
    rng.shuffle(order[1:])
    head, rest = order[0], order[1:]
    rng.shuffle(rest)
    weights = [1.0 / (r + 1) ** 0.7 for r in range(len(rest) + 1)]
    counts = {}
    budget = total - 4
    scale = budget / sum(weights)
    for tid, w in zip([head] + rest, weights):
        counts[tid] = max(5, int(w * scale))
    counts["T1538"] = 4
    diff = total - sum(counts.values())
    i = 0
    keys = [head] + rest
    while diff != 0:
        k = keys[i % len(keys)]
        step = 1 if diff > 0 else -1
        if counts[k] + step >= 5:
            counts[k] += step
            diff -= step
        i += 1
    return counts


def make_stix(out):
    objs = []
    name_of = {t[0]: t[1] for t in TECHNIQUES}
    name_of.update(dict(SUBTECHNIQUES))
    tactics_of = {t[0]: t[2] for t in TECHNIQUES}
    for tid, name, tactics, phrases in TECHNIQUES:
        refs = [{"source_name": "mitre-attack", "external_id": tid,
                 "url": f"https://attack.mitre.org/techniques/{tid}"}]
        for c in CAPEC.get(tid, []):
            refs.append({"source_name": "capec", "external_id": c,
                         "url": f"https://capec.mitre.org/data/definitions/{c[6:]}.html"})
        desc = (f"Adversaries may perform {name.lower()} as part of an operation. "
                f"For example, an adversary {phrases[0]}.(Citation: Example Vendor {tid})")
        objs.append({"type": "attack-pattern", "spec_version": "2.1", "id": sid("attack-pattern", tid),
                     "name": name, "description": desc, "external_references": refs,
                     "kill_chain_phases": [{"kill_chain_name": "mitre-attack", "phase_name": p} for p in tactics],
                     "x_mitre_is_subtechnique": False})
    for sub, name in SUBTECHNIQUES:
        parent = sub.split(".")[0]
        refs = [{"source_name": "mitre-attack", "external_id": sub,
                 "url": f"https://attack.mitre.org/techniques/{parent}/{sub.split('.')[1]}"}]
        for c in CAPEC.get(sub, []):
            refs.append({"source_name": "capec", "external_id": c})
        objs.append({"type": "attack-pattern", "spec_version": "2.1", "id": sid("attack-pattern", sub),
                     "name": name,
                     "description": f"Adversaries may use {name} as a specific form of {name_of[parent]}.",
                     "external_references": refs,
                     "kill_chain_phases": [{"kill_chain_name": "mitre-attack", "phase_name": p}
                                           for p in tactics_of[parent]],
                     "x_mitre_is_subtechnique": True})
        objs.append({"type": "relationship", "spec_version": "2.1", "id": sid("relationship", "sub:" + sub),
                     "relationship_type": "subtechnique-of", "source_ref": sid("attack-pattern", sub),
                     "target_ref": sid("attack-pattern", parent)})
    # Revoked and deprecated patterns, plus one without an ATT&CK id.
    objs.append({"type": "attack-pattern", "spec_version": "2.1", "id": sid("attack-pattern", "T1086"),
                 "name": "PowerShell", "description": "Revoked technique.", "revoked": True,
                 "external_references": [{"source_name": "mitre-attack", "external_id": "T1086"}],
                 "kill_chain_phases": [{"kill_chain_name": "mitre-attack", "phase_name": "execution"}]})
    objs.append({"type": "attack-pattern", "spec_version": "2.1", "id": sid("attack-pattern", "T1064"),
                 "name": "Scripting", "description": "Deprecated technique.", "x_mitre_deprecated": True,
                 "external_references": [{"source_name": "mitre-attack", "external_id": "T1064"}],
                 "kill_chain_phases": [{"kill_chain_name": "mitre-attack", "phase_name": "execution"}]})
    objs.append({"type": "attack-pattern", "spec_version": "2.1", "id": sid("attack-pattern", "no-id"),
                 "name": "Pattern Without Identifier", "description": "Has no ATT&CK external id.",
                 "external_references": [{"source_name": "capec", "external_id": "CAPEC-1"}]})
    # Actors, software and their technique usage.
    actors = {}
    for kind, name, tid, desc in SEED_RELATIONSHIPS:
        if name not in actors:
            actors[name] = kind
            objs.append({"type": kind, "spec_version": "2.1", "id": sid(kind, name), "name": name,
                         "description": f"{name} is tracked in this fixture."})
        objs.append({"type": "relationship", "spec_version": "2.1",
                     "id": sid("relationship", f"{name}:{tid}"), "relationship_type": "uses",
                     "source_ref": sid(kind, name), "target_ref": sid("attack-pattern", tid),
                     "description": desc})
    # A mitigation relationship (not a "uses" edge) and an unrelated object type.
    objs.append({"type": "course-of-action", "spec_version": "2.1", "id": sid("course-of-action", "M1026"),
                 "name": "Privileged Account Management", "description": "Manage privileged accounts."})
    objs.append({"type": "relationship", "spec_version": "2.1", "id": sid("relationship", "M1026:T1134"),
                 "relationship_type": "mitigates", "source_ref": sid("course-of-action", "M1026"),
                 "target_ref": sid("attack-pattern", "T1134"),
                 "description": "Limit permissions so that users cannot create tokens."})
    objs.append({"type": "x-mitre-tactic", "spec_version": "2.1", "id": sid("x-mitre-tactic", "TA0006"),
                 "name": "Credential Access", "x_mitre_shortname": "credential-access"})
    bundle = {"type": "bundle", "id": sid("bundle", "enterprise-mini"), "spec_version": "2.1", "objects": objs}
    (out / "stix" / "enterprise-attack-mini.json").write_text(json.dumps(bundle, indent=1) + "\n")

    capec_objs = []
    for cid, (name, desc) in CAPEC_TEXT.items():
        capec_objs.append({"type": "attack-pattern", "spec_version": "2.1", "id": sid("attack-pattern", cid),
                           "name": name, "description": desc,
                           "external_references": [{"source_name": "capec", "external_id": cid,
                                                    "url": f"https://capec.mitre.org/data/definitions/{cid[6:]}.html"}]})
    capec = {"type": "bundle", "id": sid("bundle", "capec-mini"), "spec_version": "2.1", "objects": capec_objs}
    (out / "stix" / "capec-mini.json").write_text(json.dumps(capec, indent=1) + "\n")


def make_corpus(out, rng):
    counts = class_counts(1000, rng)
    name_of = {t[0]: t[1] for t in TECHNIQUES}
    sub_of = {}
    for sub, name in SUBTECHNIQUES:
        sub_of.setdefault(sub.split(".")[0], []).append((sub, name))
    rows = []
    for tid, name, tactics, phrases in TECHNIQUES:
        sibs = siblings_of(tid)
        seen = set()
        while len([r for r in rows if r[1] == tid]) < counts[tid]:
            text = sentence(rng, tid, phrases, sibs)
            if text in seen:
                continue
            seen.add(text)
            sub, sub_name = tid, name
            if tid in sub_of and rng.random() < 0.3:
                sub, sub_name = rng.choice(sub_of[tid])
            rows.append((text, tid, sub, sub_name))
    rng.shuffle(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["text", "technique_id", "subtechnique_id", "technique_name"])
    for r in rows:
        w.writerow(r)
    (out / "corpus" / "fixture-1000.csv").write_text(buf.getvalue())
    return counts


def make_tram(out, rng):
    records = []
    picked = [t for t in TECHNIQUES if t[0] not in ("T1538",)][:30]
    for i, (tid, name, tactics, phrases) in enumerate(picked):
        n = 1 if i % 7 == 6 else 2 + (i % 4)
        for _ in range(n):
            text = sentence(rng, tid, phrases, [])
            target = tid
            subs = [s for s, _ in SUBTECHNIQUES if s.startswith(tid + ".")]
            if subs and rng.random() < 0.5:
                target = subs[0]
            records.append({"text": text, "mappings": [{"attack_id": target, "name": name}]})
    records.append({"text": "The actor used an unknown technique identifier.",
                    "mappings": [{"attack_id": "T9999", "name": "Unknown"}]})
    records.append({"text": "The malware executed PowerShell and then dumped credentials from LSASS.",
                    "mappings": [{"attack_id": "T1059.001"}, {"attack_id": "T1003.001"}]})
    doc = {"sentences": records}
    (out / "tram" / "tram-mini.json").write_text(json.dumps(doc, indent=1) + "\n")


DOC_PLANS = [
    ("doc-retail-intrusion", "Synthetic report: retail point-of-sale intrusion",
     ["T1078", "T1087", "T1018", "T1016", "T1003", "T1134", "T1560", "T1048", "T1055", "T1059", "T1021"], ["T1074"]),
    ("doc-ransomware-precursor", "Synthetic report: intrusion ahead of ransomware deployment",
     ["T1566", "T1204", "T1059", "T1047", "T1053", "T1003", "T1021", "T1570", "T1486", "T1490", "T1562", "T1070"], ["T1105"]),
    ("doc-espionage-campaign", "Synthetic report: long-running espionage campaign",
     ["T1566", "T1204", "T1547", "T1071", "T1027", "T1140", "T1083", "T1005", "T1560", "T1041"], ["T1036"]),
    ("doc-indictment-summary", "Synthetic report: summary of charged intrusion activity",
     ["T1190", "T1078", "T1133", "T1003", "T1005", "T1560", "T1048"], ["T1090"]),
    ("doc-healthcare-advisory", "Synthetic report: advisory on attacks against healthcare",
     ["T1566", "T1059", "T1105", "T1055", "T1082", "T1057", "T1069", "T1018", "T1486", "T1490", "T1562", "T1573", "T1102"], ["T1112"]),
    ("doc-ryuk-return", "Synthetic report: rapid ransomware operation",
     ["T1078", "T1021", "T1047", "T1569", "T1046", "T1087", "T1069", "T1486", "T1070", "T1036"], []),
]


def make_docs(out, rng):
    by_id = {t[0]: t for t in TECHNIQUES}
    for doc_id, title, described, undescribed in DOC_PLANS:
        described = list(dict.fromkeys(described))
        sentences = []
        for tid in described:
            for _ in range(rng.choice([1, 1, 2])):
                sentences.append(sentence(rng, tid, by_id[tid][3], []))
        n_filler = max(4, len(sentences) // 2)
        for _ in range(n_filler):
            sentences.append(rng.choice(FILLER))
        rng.shuffle(sentences)
        truth = sorted(set(described) | set(undescribed))
        # Record one ground-truth entry at sub-technique level to exercise parent resolution.
        if "T1059" in truth:
            truth[truth.index("T1059")] = "T1059.001"
        doc = {"doc_id": doc_id, "title": title, "source_url": f"fixture://{doc_id}",
               "sentences": sentences, "techniques": truth}
        (out / "docs" / f"{doc_id}.json").write_text(json.dumps(doc, indent=1) + "\n")


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
    for d in ("stix", "corpus", "tram", "docs"):
        (out / d).mkdir(parents=True, exist_ok=True)
    rng = random.Random(20230607)
    make_stix(out)
    make_corpus(out, rng)
    make_tram(out, rng)
    make_docs(out, rng)


if __name__ == "__main__":
    main()
