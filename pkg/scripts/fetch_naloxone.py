"""Download the archived naloxone-law dataset from Harvard Dataverse.

Run explicitly; nothing in the package or test suite touches the network.

    python scripts/fetch_naloxone.py            # list files in the dataset
    python scripts/fetch_naloxone.py --file ID  # download one file by its id

The file lands in replication/data/naloxone.tab. Fill in the column names in
replication/naloxone_mapping.json afterwards, then run the acceptance suite.
"""

import argparse
import json
import sys
import urllib.request
from pathlib import Path

DOI = "doi:10.7910/DVN/47TMEQ"
API = "https://dataverse.harvard.edu/api"
DEST = Path(__file__).resolve().parents[1] / "replication" / "data" / "naloxone.tab"


def list_files():
    url = f"{API}/datasets/:persistentId/?persistentId={DOI}"
    with urllib.request.urlopen(url, timeout=30) as resp:
        meta = json.load(resp)
    for f in meta["data"]["latestVersion"]["files"]:
        df = f["dataFile"]
        print(f"{df['id']}\t{df.get('filename')}\t{df.get('filesize', '?')} bytes")


def download(file_id, dest=DEST):
    # format=original returns the uploaded file rather than the tabular ingest copy
    url = f"{API}/access/datafile/{file_id}?format=original"
    dest.parent.mkdir(parents=True, exist_ok=True)
    tmp = dest.with_suffix(".part")
    with urllib.request.urlopen(url, timeout=120) as resp, open(tmp, "wb") as fh:
        fh.write(resp.read())
    tmp.replace(dest)
    print(f"wrote {dest}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--file", type=int, help="Dataverse file id to download")
    args = parser.parse_args(argv)
    try:
        if args.file is None:
            list_files()
        else:
            download(args.file)
    except OSError as exc:
        print(f"fetch failed: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
