//! `forge`: every pipeline stage from the command line. Machine output is
//! JSON on stdout; diagnostics go to stderr.

use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use forge_core::catalog::{load_catalog_dir, load_game_dir, Catalog, CatalogDocument, Transaction, TransactionSet};
use forge_core::mining::{association_rules, frequent_itemsets};
use forge_core::session::{DesignSession, KnowledgeBase, SessionConfig, Snapshot};
use forge_core::vgdl::{parse_game, parse_level, serialize_game, GameDescription, InteractionDef, Params, SpriteDef, Value};
use forge_server::AppState;

#[derive(Parser)]
#[command(name = "forge", version, about = "Game design recommendations mined from a catalog of game descriptions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a game description and print its normalized form.
    Parse(ParseArgs),
    /// Build or inspect a catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Mine frequent itemsets and association rules from baskets.
    Mine(MineArgs),
    /// Print recommendations for a session or a game as JSON.
    #[command(subcommand)]
    Recommend(RecommendCommand),
    /// Create and edit saved design sessions.
    #[command(subcommand)]
    Session(SessionCommand),
    /// Accept a pending recommendation into a saved session.
    Blend(BlendArgs),
    /// Start the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// Game file, or a game directory with `game.vgd` and `level_<n>.txt`.
    file: PathBuf,
    /// Level files to parse against the game's mapping.
    #[arg(long = "level")]
    levels: Vec<PathBuf>,
    /// Print the parsed structure as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// Load a directory of games and write the catalog document.
    Build {
        dir: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the catalog document (games, baskets, pair map) of a catalog.
    Export {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MineArgs {
    /// Baskets as JSON, a catalog document, or a catalog directory.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    min_support: Option<f64>,
    #[arg(long)]
    min_confidence: Option<f64>,
    /// Thresholds file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Emit the frequent itemsets instead of the rules.
    #[arg(long)]
    itemsets: bool,
}

#[derive(Args)]
struct Source {
    /// Catalog directory or catalog document.
    #[arg(long)]
    catalog: PathBuf,
    /// Saved session.
    #[arg(long, conflicts_with = "game")]
    session: Option<PathBuf>,
    /// Game file or game directory to start from instead of a session.
    #[arg(long)]
    game: Option<PathBuf>,
    #[arg(long = "level", requires = "game")]
    levels: Vec<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum RecommendCommand {
    Sprites {
        #[command(flatten)]
        source: Source,
        /// Keep the strongest recommendation per class.
        #[arg(long)]
        dedupe: bool,
    },
    Interactions {
        #[command(flatten)]
        source: Source,
        /// Only interactions involving this class.
        #[arg(long)]
        filter: Option<String>,
    },
    Placements {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        sprite: String,
    },
}

#[derive(Args)]
struct Saved {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    session: PathBuf,
    /// Where to write the updated session (defaults to `--session`).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SessionCommand {
    /// Start a session, empty or from a game, and save it.
    New {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        game: Option<PathBuf>,
        #[arg(long = "level", requires = "game")]
        levels: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print a saved session with its pending recommendations.
    Show {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        session: PathBuf,
    },
    AddSprite {
        #[command(flatten)]
        saved: Saved,
        #[arg(long)]
        name: String,
        #[arg(long)]
        class: String,
        /// `key=value`, repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        image: Option<String>,
    },
    AddInteraction {
        #[command(flatten)]
        saved: Saved,
        #[arg(long)]
        actor: String,
        #[arg(long)]
        other: String,
        #[arg(long)]
        effect: String,
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Accept `sprite:IDX` or `interaction:IDX`.
    Accept {
        #[command(flatten)]
        saved: Saved,
        choice: String,
    },
    Place {
        #[command(flatten)]
        saved: Saved,
        #[arg(long)]
        sprite: String,
        #[arg(long)]
        row: usize,
        #[arg(long)]
        col: usize,
    },
    Undo {
        #[command(flatten)]
        saved: Saved,
    },
    /// Print the game text and levels, or write them into a directory.
    Export {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BlendArgs {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    session: PathBuf,
    /// `sprite:IDX` or `interaction:IDX`.
    #[arg(long)]
    accept: String,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// Catalog directory or catalog document.
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Defaults for new sessions.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse(args) => parse(args),
        Command::Catalog(CatalogCommand::Build { dir, output }) => {
            let catalog = load_catalog_dir(&dir)?;
            emit(&catalog.document(), output.as_deref())
        }
        Command::Catalog(CatalogCommand::Export { catalog, output }) => {
            emit(&load_catalog(&catalog)?.document(), output.as_deref())
        }
        Command::Mine(args) => mine(args),
        Command::Recommend(cmd) => recommend(cmd),
        Command::Session(cmd) => session(cmd),
        Command::Blend(args) => {
            let kb = knowledge(&args.catalog)?;
            let mut s = load_session(&kb, &args.session)?;
            accept(&kb, &mut s, &args.accept)?;
            save_session(&s, &args.output)?;
            emit(&s, None)
        }
        Command::Serve(args) => serve(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).with_context(|| format!("decoding {}", path.display()))
}

fn emit<T: Serialize + ?Sized>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_catalog(path: &Path) -> Result<Catalog> {
    if path.is_dir() {
        Ok(load_catalog_dir(path)?)
    } else {
        let doc: CatalogDocument = read_json(path)?;
        Ok(doc.into_catalog()?)
    }
}

fn knowledge(path: &Path) -> Result<KnowledgeBase> {
    Ok(KnowledgeBase::new(load_catalog(path)?))
}

fn load_config(path: Option<&Path>) -> Result<SessionConfig> {
    let config: SessionConfig = match path {
        Some(p) => read_json(p)?,
        None => SessionConfig::default(),
    };
    config.validate()?;
    Ok(config)
}

fn load_game(path: &Path, levels: &[PathBuf]) -> Result<GameDescription> {
    let mut game = if path.is_dir() {
        load_game_dir(path)?
    } else {
        parse_game(&read(path)?).with_context(|| format!("parsing {}", path.display()))?
    };
    for level in levels {
        let grid = parse_level(&read(level)?, &game.mapping).with_context(|| format!("parsing {}", level.display()))?;
        game.levels.push(grid);
    }
    game.validate()?;
    Ok(game)
}

fn parse(args: ParseArgs) -> Result<()> {
    let game = load_game(&args.file, &args.levels)?;
    if args.json {
        emit(&game, None)
    } else {
        print!("{}", serialize_game(&game));
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Baskets {
    Plain(Vec<Vec<String>>),
    Tagged(Vec<Transaction>),
    Set(TransactionSet),
    Document(Box<CatalogDocument>),
}

fn mine(args: MineArgs) -> Result<()> {
    let transactions = if args.input.is_dir() {
        load_catalog_dir(&args.input)?.sprite_baskets()
    } else {
        match read_json::<Baskets>(&args.input)? {
            Baskets::Plain(b) => TransactionSet::from_items(b),
            Baskets::Tagged(transactions) => TransactionSet { transactions },
            Baskets::Set(set) => set,
            Baskets::Document(doc) => TransactionSet {
                transactions: doc.sprite_baskets,
            },
        }
    };
    let config = load_config(args.config.as_deref())?;
    let min_support = args.min_support.unwrap_or(config.min_support);
    let min_confidence = args.min_confidence.unwrap_or(config.min_confidence);
    if !(min_confidence > 0.0 && min_confidence <= 1.0) {
        bail!("min-confidence must lie in (0, 1], got {min_confidence}");
    }
    let itemsets = frequent_itemsets(&transactions, min_support)?;
    if args.itemsets {
        emit(&itemsets, args.output.as_deref())
    } else {
        emit(&association_rules(&itemsets, min_confidence), args.output.as_deref())
    }
}

fn open_source(kb: &KnowledgeBase, source: &Source) -> Result<DesignSession> {
    let config = source.config.as_deref().map(|p| load_config(Some(p))).transpose()?;
    match (&source.session, &source.game) {
        (Some(path), _) => {
            let mut s = load_session(kb, path)?;
            if let Some(config) = config {
                s.config = config;
                s.refresh(kb)?;
            }
            Ok(s)
        }
        (None, Some(path)) => {
            let game = load_game(path, &source.levels)?;
            Ok(DesignSession::from_game(kb, game, config.unwrap_or_default())?)
        }
        (None, None) => bail!("one of --session or --game is required"),
    }
}

/// A pending recommendation with its index in the session's list.
#[derive(Serialize)]
struct Indexed<T> {
    index: usize,
    #[serde(flatten)]
    item: T,
}

fn recommend(cmd: RecommendCommand) -> Result<()> {
    match cmd {
        RecommendCommand::Sprites { source, dedupe } => {
            let kb = knowledge(&source.catalog)?;
            let s = open_source(&kb, &source)?;
            let mut seen = std::collections::BTreeSet::new();
            let out: Vec<_> = s
                .pending_sprites
                .iter()
                .enumerate()
                .filter(|(_, r)| !dedupe || seen.insert(r.sprite_class.clone()))
                .map(|(index, item)| Indexed { index, item })
                .collect();
            emit(&out, None)
        }
        RecommendCommand::Interactions { source, filter } => {
            let kb = knowledge(&source.catalog)?;
            let s = open_source(&kb, &source)?;
            let out: Vec<_> = s
                .pending_interactions
                .iter()
                .enumerate()
                .filter(|(_, r)| filter.as_deref().is_none_or(|c| r.involves(c)))
                .map(|(index, item)| Indexed { index, item })
                .collect();
            emit(&out, None)
        }
        RecommendCommand::Placements { source, sprite } => {
            let kb = knowledge(&source.catalog)?;
            let s = open_source(&kb, &source)?;
            emit(&s.placement_hints(&kb, &sprite)?, None)
        }
    }
}

fn load_session(kb: &KnowledgeBase, path: &Path) -> Result<DesignSession> {
    let snapshot: Snapshot = read_json(path)?;
    DesignSession::restore(kb, snapshot).with_context(|| format!("restoring {}", path.display()))
}

fn save_session(s: &DesignSession, path: &Path) -> Result<()> {
    emit(&s.snapshot(), Some(path))
}

fn parse_params(pairs: &[String]) -> Result<Params> {
    pairs
        .iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("expected key=value, got `{p}`"))?;
            Ok((k.to_string(), Value::infer(v)))
        })
        .collect()
}

fn accept(kb: &KnowledgeBase, s: &mut DesignSession, choice: &str) -> Result<()> {
    let (kind, index) = choice
        .split_once(':')
        .ok_or_else(|| anyhow!("expected sprite:IDX or interaction:IDX, got `{choice}`"))?;
    let index: usize = index.parse().with_context(|| format!("bad index in `{choice}`"))?;
    match kind {
        "sprite" => s.accept_sprite(kb, index)?,
        "interaction" => s.accept_interaction(kb, index)?,
        other => bail!("unknown recommendation kind `{other}`"),
    }
    Ok(())
}

/// Loads the saved session, applies `f`, saves it and prints it.
fn edit(saved: &Saved, f: impl FnOnce(&KnowledgeBase, &mut DesignSession) -> Result<()>) -> Result<()> {
    let kb = knowledge(&saved.catalog)?;
    let mut s = load_session(&kb, &saved.session)?;
    f(&kb, &mut s)?;
    save_session(&s, saved.output.as_deref().unwrap_or(&saved.session))?;
    emit(&s, None)
}

fn session(cmd: SessionCommand) -> Result<()> {
    match cmd {
        SessionCommand::New {
            catalog,
            config,
            game,
            levels,
            output,
        } => {
            let kb = knowledge(&catalog)?;
            let config = load_config(config.as_deref())?;
            let s = match game {
                Some(path) => DesignSession::from_game(&kb, load_game(&path, &levels)?, config)?,
                None => DesignSession::new(&kb, config)?,
            };
            save_session(&s, &output)?;
            emit(&s, None)
        }
        SessionCommand::Show { catalog, session } => {
            let kb = knowledge(&catalog)?;
            emit(&load_session(&kb, &session)?, None)
        }
        SessionCommand::AddSprite {
            saved,
            name,
            class,
            params,
            image,
        } => {
            let mut sprite = SpriteDef::new(name, class);
            sprite.params = parse_params(&params)?;
            sprite.image = image;
            edit(&saved, |kb, s| Ok(s.add_sprite(kb, sprite)?))
        }
        SessionCommand::AddInteraction {
            saved,
            actor,
            other,
            effect,
            params,
        } => {
            let mut inter = InteractionDef::new(actor, other, effect);
            inter.params = parse_params(&params)?;
            edit(&saved, |kb, s| Ok(s.add_interaction(kb, inter)?))
        }
        SessionCommand::Accept { saved, choice } => edit(&saved, |kb, s| accept(kb, s, &choice)),
        SessionCommand::Place { saved, sprite, row, col } => edit(&saved, |kb, s| Ok(s.place(kb, &sprite, row, col)?)),
        SessionCommand::Undo { saved } => edit(&saved, |kb, s| Ok(s.undo(kb)?)),
        SessionCommand::Export {
            catalog,
            session,
            out_dir,
        } => {
            let kb = knowledge(&catalog)?;
            let export = load_session(&kb, &session)?.export();
            let Some(dir) = out_dir else {
                return emit(&export, None);
            };
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut written = vec![dir.join(forge_core::catalog::GAME_FILE)];
            fs::write(&written[0], &export.game)?;
            for (i, level) in export.levels.iter().enumerate() {
                let path = dir.join(format!("level_{i}.txt"));
                fs::write(&path, level)?;
                written.push(path);
            }
            emit(&written, None)
        }
    }
}

fn serve(args: ServeArgs) -> Result<()> {
    let kb = knowledge(&args.catalog)?;
    let defaults = load_config(args.config.as_deref())?;
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("serving {} games on http://{addr}", kb.catalog().len());
    runtime.block_on(forge_server::serve(AppState::new(kb, defaults), addr))?;
    Ok(())
}
