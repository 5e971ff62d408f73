use jitminer_core::fixture::{numbered, FixtureRepo, DAY, EPOCH};
use jitminer_core::vcs::{parse_unified_diff, write_unified_diff, ChangeKind};
use jitminer_core::{Error, RepoHandle};

const ALICE: &str = "Alice <alice@example.com>";
const BOB: &str = "Bob <BOB@Example.com>";

#[test]
fn open_variants() {
    let fx = FixtureRepo::new();
    let handle = RepoHandle::open(fx.path()).unwrap();
    assert_eq!(handle.root(), fx.path().canonicalize().unwrap());
    assert_eq!(handle.default_branch(), "main");

    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(RepoHandle::open(empty.path()), Err(Error::NotARepository(_))));
    assert!(matches!(RepoHandle::open(empty.path().join("missing")), Err(Error::Io(_))));
}

#[test]
fn unborn_repository_has_no_commits() {
    let fx = FixtureRepo::new();
    let handle = RepoHandle::open(fx.path()).unwrap();
    assert!(handle.list_commits(None, None).unwrap().is_empty());
}

#[test]
fn list_commits_ascending_and_filtered() {
    let fx = FixtureRepo::new();
    let c1 = fx.commit(&[("a.txt", Some("1\n"))], "one", ALICE, EPOCH);
    let c2 = fx.commit(&[("a.txt", Some("2\n"))], "two\n\nbody line", BOB, EPOCH + DAY);
    let c3 = fx.commit(&[("b.txt", Some("3\n"))], "three", ALICE, EPOCH + 2 * DAY);
    let handle = RepoHandle::open(fx.path()).unwrap();

    let all = handle.list_commits(None, None).unwrap();
    let hashes: Vec<&str> = all.iter().map(|c| c.hash.as_str()).collect();
    assert_eq!(hashes, [c1.as_str(), c2.as_str(), c3.as_str()]);
    assert_eq!(all[1].author_id, "bob <bob@example.com>");
    assert_eq!(all[1].timestamp, EPOCH + DAY);
    assert!(all[1].message.starts_with("two\n\nbody line"));
    assert_eq!(all[0].parents, Vec::<String>::new());
    assert_eq!(all[2].first_parent(), Some(c2.as_str()));

    assert!(handle.list_commits(Some(EPOCH + 10 * DAY), None).unwrap().is_empty());
    let middle = handle.list_commits(Some(EPOCH + DAY), Some(EPOCH + DAY)).unwrap();
    assert_eq!(middle.len(), 1);
    assert_eq!(middle[0].hash, c2);
}

#[test]
fn commit_diff_kinds_and_counts() {
    let fx = FixtureRepo::new();
    let c1 = fx.commit(&[("src/ten.txt", Some(&numbered("line", 10))), ("five.txt", Some(&numbered("x", 5)))], "add", ALICE, EPOCH);
    let c2 = fx.commit(&[("five.txt", None)], "drop", ALICE, EPOCH + DAY);
    let handle = RepoHandle::open(fx.path()).unwrap();

    let root = handle.commit_diff(&c1).unwrap();
    let ten = root.iter().find(|d| d.path == "src/ten.txt").unwrap();
    assert_eq!((ten.kind, ten.lines_added, ten.lines_deleted, ten.new_file_lines), (ChangeKind::Added, 10, 0, 10));
    assert!(ten.old_path.is_none());

    let del = handle.commit_diff(&c2).unwrap();
    assert_eq!(del.len(), 1);
    assert_eq!((del[0].kind, del[0].lines_added, del[0].lines_deleted, del[0].new_file_lines), (ChangeKind::Deleted, 0, 5, 0));

    assert!(matches!(handle.commit_diff("0123456789abcdef0123456789abcdef01234567"), Err(Error::UnknownCommit(_))));
}

/// Edits a 10-line file with 3 additions and 1 deletion.
fn edit_three_one(text: &str) -> String {
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    lines.remove(1);
    lines.insert(4, "new a".into());
    lines.insert(5, "new b".into());
    lines.push("new c".into());
    lines.iter().map(|l| format!("{l}\n")).collect()
}

#[test]
fn two_file_edit_matches_numstat_and_line_counts() {
    let fx = FixtureRepo::new();
    let a = numbered("a", 10);
    let b = numbered("b", 10);
    let c1 = fx.commit(&[("one/a.txt", Some(&a)), ("two/b.txt", Some(&b))], "base", ALICE, EPOCH);
    let c2 = fx.commit(
        &[("one/a.txt", Some(&edit_three_one(&a))), ("two/b.txt", Some(&edit_three_one(&b)))],
        "edit",
        ALICE,
        EPOCH + DAY,
    );
    let handle = RepoHandle::open(fx.path()).unwrap();
    let deltas = handle.commit_diff(&c2).unwrap();
    assert_eq!(deltas.len(), 2);
    for d in &deltas {
        assert_eq!((d.kind, d.lines_added, d.lines_deleted, d.new_file_lines), (ChangeKind::Modified, 3, 1, 12));
    }

    for hash in [&c1, &c2] {
        let numstat = fx.run(&["show", "--numstat", "--format=", hash]);
        let (mut added, mut deleted) = (0, 0);
        for line in numstat.lines().filter(|l| !l.is_empty()) {
            let mut parts = line.split('\t');
            added += parts.next().unwrap().parse::<u32>().unwrap();
            deleted += parts.next().unwrap().parse::<u32>().unwrap();
        }
        let deltas = handle.commit_diff(hash).unwrap();
        assert_eq!(deltas.iter().map(|d| d.lines_added).sum::<u32>(), added);
        assert_eq!(deltas.iter().map(|d| d.lines_deleted).sum::<u32>(), deleted);
    }

    assert_eq!(handle.file_line_count_at(&c1, "one/a.txt").unwrap(), 10);
    assert_eq!(handle.file_line_count_at(&c2, "one/a.txt").unwrap(), 12);
    assert_eq!(handle.file_line_count_at(&c2, "absent.txt").unwrap(), 0);
}

#[test]
fn renames_binary_and_no_newline() {
    let fx = FixtureRepo::new();
    fx.commit(&[("docs/guide.md", Some(&numbered("guide", 20)))], "add", ALICE, EPOCH);
    let mv = fx.rename("docs/guide.md", "manual/guide.md", None, "move", ALICE, EPOCH + DAY);
    let bin = fx.commit_bytes("logo.png", &[0x89, b'P', b'N', b'G', 0, 0, 1, 2, 3], "logo", ALICE, EPOCH + 2 * DAY);
    let tail = fx.commit(&[("tail.txt", Some("no newline"))], "tail", ALICE, EPOCH + 3 * DAY);
    let handle = RepoHandle::open(fx.path()).unwrap();

    let d = handle.commit_diff(&mv).unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].kind, ChangeKind::Renamed);
    assert_eq!(d[0].old_path.as_deref(), Some("docs/guide.md"));
    assert_eq!((d[0].lines_added, d[0].lines_deleted), (0, 0));

    let d = handle.commit_diff(&bin).unwrap();
    assert!(d[0].binary);
    assert_eq!((d[0].lines_added, d[0].new_file_lines), (0, 0));

    let d = handle.commit_diff(&tail).unwrap();
    assert_eq!(d[0].added_lines().collect::<Vec<_>>(), [&(1, "no newline".to_owned())]);
    assert_eq!(handle.file_line_count_at(&tail, "tail.txt").unwrap(), 1);
}

#[test]
fn serialized_commit_diffs_reparse_identically() {
    let fx = FixtureRepo::new();
    let mut hashes = vec![fx.commit(&[("a/x.txt", Some(&numbered("x", 30))), ("b.txt", Some("b\n"))], "one", ALICE, EPOCH)];
    let mut edited = numbered("x", 30).replace("x 7\n", "seven\n").replace("x 20\n", "");
    edited.push_str("tail");
    hashes.push(fx.commit(&[("a/x.txt", Some(&edited)), ("b.txt", None)], "two", BOB, EPOCH + DAY));
    hashes.push(fx.rename("a/x.txt", "c/y.txt", Some("short\n"), "three", ALICE, EPOCH + 2 * DAY));
    hashes.push(fx.commit_bytes("bin.dat", &[0, 1, 2, 0, 255], "four", ALICE, EPOCH + 3 * DAY));
    let handle = RepoHandle::open(fx.path()).unwrap();

    for hash in &hashes {
        let parsed = parse_unified_diff(&handle.commit_diff_text(hash).unwrap()).unwrap();
        let text = write_unified_diff(&parsed);
        let reparsed = parse_unified_diff(&text).unwrap();
        assert_eq!(parsed.len(), reparsed.len());
        for (a, b) in parsed.iter().zip(&reparsed) {
            assert_eq!(
                (&a.path, &a.old_path, a.kind, a.binary, &a.hunks, a.lines_added, a.lines_deleted),
                (&b.path, &b.old_path, b.kind, b.binary, &b.hunks, b.lines_added, b.lines_deleted)
            );
        }
    }
}

#[test]
fn blame_traces_lines() {
    let fx = FixtureRepo::new();
    let c1 = fx.commit(&[("f.txt", Some("keep\nbuggy\n"))], "root", ALICE, EPOCH);
    let c2 = fx.commit(&[("f.txt", Some("keep\nbuggy\nmore\n"))], "extend", BOB, EPOCH + DAY);
    let c3 = fx.commit(&[("f.txt", Some("keep\nmore\n"))], "fix", BOB, EPOCH + 2 * DAY);
    let handle = RepoHandle::open(fx.path()).unwrap();

    assert_eq!(handle.blame_line("f.txt", 2, &c3).unwrap(), c1);
    assert_eq!(handle.blame_line("f.txt", 1, &c3).unwrap(), c1);
    assert_eq!(handle.blame_line("f.txt", 3, &c3).unwrap(), c2);
    for _ in 0..3 {
        assert_eq!(handle.blame_line("f.txt", 2, &c3).unwrap(), c1);
    }
    assert!(matches!(handle.blame_line("f.txt", 9, &c3), Err(Error::LineOutOfRange { .. })));
    assert!(matches!(handle.blame_line("nope.txt", 1, &c3), Err(Error::FileAbsent { .. })));
    // root commit has no parent to blame at
    assert!(matches!(handle.blame_line("f.txt", 1, &c1), Err(Error::FileAbsent { .. })));
}

#[test]
fn repo_file_counts() {
    let fx = FixtureRepo::new();
    let files = ["a", "b/c", "b/d", "b/e/f", "b/e/g", "h/i/j/k", "l/m"];
    let content: Vec<(&str, Option<&str>)> = files.iter().map(|f| (*f, Some("x\n"))).collect();
    let c1 = fx.commit(&content, "seven", ALICE, EPOCH);
    let removal: Vec<(&str, Option<&str>)> = files.iter().map(|f| (*f, None)).collect();
    let c2 = fx.commit(&removal, "wipe", ALICE, EPOCH + DAY);
    let handle = RepoHandle::open(fx.path()).unwrap();
    assert_eq!(handle.repo_file_count_at(&c1).unwrap(), 7);
    assert_eq!(handle.repo_file_count_at(&c2).unwrap(), 0);
    assert!(matches!(handle.repo_file_count_at("deadbeef"), Err(Error::UnknownCommit(_))));
}
